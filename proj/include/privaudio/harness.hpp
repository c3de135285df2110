#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "privaudio/room.hpp"
#include "privaudio/toml.hpp"

namespace privaudio {

/// FNV-1a 64-bit running hash; chain calls by passing the previous result.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(const std::string& s, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hash_hex(std::uint64_t h);

/// Runs body(0..count-1) across a small thread pool. Work is handed out by an
/// atomic counter; callers that write results into per-index slots get output
/// independent of scheduling. The first exception thrown by any body is
/// rethrown on the calling thread after all workers finish.
void parallel_for(long count, int workers, const std::function<void(long)>& body);

struct RoomSpec {
    bool present = false;
    double width = 7.0;
    double height = 8.0;
    double absorption = 0.35;
    double sample_rate_hz = 16000.0;
    double speed_of_sound = 343.0;
    long rir_len = 2000;
    int max_order = -1;  // auto
};

struct MeasuredSpec {
    bool present = false;
    std::string rir_dir;          // exported impulse-response set
    std::string sweep_dir;        // alternatively: sweep recordings ...
    std::string reference_sweep;  // ... plus the sweep that produced them
    long rir_len = 2000;
};

struct PlacementSpec {
    std::vector<Point> speakers;  // explicit positions win over counts
    std::vector<Point> listeners;
    std::vector<Point> extra_points;
    int speaker_count = 6;
    int listener_count = 2;
    int extra_count = 1;
    double margin = 0.5;          // meters kept clear of every wall
    double min_separation = 0.4;  // meters between any two sampled points
};

struct MessageSpec {
    std::vector<std::string> files;  // mono WAVs, cycled if fewer than listeners
    long message_len = 16000;
};

struct DesignSpec {
    double noise_std = 1.0;
    double noise_len_ratio = 0.5;  // noise_len = round(ratio * drive_len)
    double tolerance = 1e-6;
    long max_iter = 2000;
    double projection_tolerance = 1e-8;
    long projection_max_iter = 20000;
    double target_power = 0.0;  // > 0: scale drives to this mean power
};

struct GridSpec {
    int nx = 20;
    int ny = 21;
    double margin = 0.25;  // meters kept clear of the walls
    int full_nx = 60;      // used under --full-scale
    int full_ny = 70;
};

struct SweepSpec {
    std::vector<double> noise_stds;        // multiples of the carrier RMS
    std::vector<double> noise_len_ratios;  // of drive_len
    std::vector<int> dropout_counts;
    std::vector<double> rir_snr_db;
};

/// Declarative description of one experiment, loaded from a TOML file or
/// built directly in code. Exactly one of room / measured must be present.
struct ScenarioConfig {
    std::string scenario = "demo";
    std::string method = "both";  // mccs | nullspace | both
    std::uint64_t seed = 1;
    int trials = 10;

    RoomSpec room;
    MeasuredSpec measured;
    PlacementSpec placement;
    MessageSpec messages;
    DesignSpec design;
    GridSpec grid;
    SweepSpec sweep;

    bool full_scale = false;
    int workers = 1;
    bool strict = false;
    std::string out_dir = ".";

    static ScenarioConfig from_toml(const TomlDoc& doc);
    static ScenarioConfig load(const std::string& path);

    std::vector<std::string> method_list() const;  // {"mccs"}, {"nullspace"}, or both

    /// Every field that influences results, serialized deterministically;
    /// the config hash is the FNV-1a of this string, so formatting-only file
    /// edits do not change it but any effective change does.
    std::string canonical_description() const;
    std::string config_hash() const;

    /// Throws ConfigError on contradictions (room and measured both set,
    /// no messages, nonpositive dimensions, missing files).
    void validate() const;
};

constexpr long kNoLag = -(1L << 60);  // align_lag sentinel for metric-free rows

/// One CSV row. NaN doubles, kNoLag, and negative solver_iterations /
/// solver_converged serialize as empty cells.
struct ResultRow {
    std::string scenario;
    std::string variant;
    std::string method;
    std::string label;
    double x_m;
    double y_m;
    std::string sweep_name;
    double sweep_value;
    double stoi;
    double relative_error;
    double relative_error_optscale;
    double snr_db;
    long align_lag = kNoLag;
    long solver_iterations = -1;
    double solver_relative_residual;
    int solver_converged = -1;
    double solver_tolerance;
    std::uint64_t seed = 0;
    std::string config_hash;

    ResultRow();
};

struct ResultTable {
    std::vector<ResultRow> rows;

    static const std::string& header();
    void write_csv(const std::string& path) const;
    static ResultTable read_csv(const std::string& path);

    /// The single config hash shared by all rows; throws IoError if rows
    /// from differently-hashed runs have been mixed together.
    std::string single_hash() const;

    bool any_nonconverged() const;
};

/// Median of a sample (mean of the two central order statistics when even).
/// Throws InvalidInput on an empty sample.
double median(std::vector<double> xs);

/// Seeded placement of speakers, listeners, and extra points: uniform draws
/// inside the walls-minus-margin rectangle, rejecting points closer than
/// min_separation to anything already placed. Explicit positions in the spec
/// are validated and used as given.
struct Placement {
    std::vector<Point> speakers;
    std::vector<Point> listeners;
    std::vector<Point> extras;
};
Placement place_points(const RoomScene& room, const PlacementSpec& spec, std::uint64_t seed);

/// Writes manifest.json (scenario, config hash, seed, trials, column list).
/// Contains nothing volatile, so reruns reproduce it byte for byte.
void write_manifest(const std::string& dir, const ScenarioConfig& cfg);

}  // namespace privaudio
