#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "privaudio/harness.hpp"
#include "privaudio/synthesis.hpp"

namespace privaudio {

/// One trial's world: placements, channels from the speakers to the designed
/// listeners and to any extra evaluation points, and the messages to deliver.
struct SceneBundle {
    RoomScene room;
    bool has_room = false;
    Placement placement;
    ChannelSet channels;                          // speakers -> listeners
    std::vector<std::vector<Signal>> extra_rirs;  // [extra][speaker]
    MessageSet messages;
};

/// Messages for `listeners` spots: each file read mono, resampled to `rate`
/// if needed, zero-padded or cut to message_len; files are cycled when there
/// are fewer than listeners.
MessageSet load_messages(const MessageSpec& spec, int listeners, double rate);

/// Places points with the trial seed and simulates every channel.
SceneBundle build_scene(const ScenarioConfig& cfg, std::uint64_t trial_seed, int workers = 1);

/// build_scene with every wall absorption forced to `absorption`, so echoic
/// and echo-free variants share identical placements.
SceneBundle build_scene_with_absorption(const ScenarioConfig& cfg, std::uint64_t trial_seed,
                                        double absorption, int workers = 1);

/// Scene from an imported channel-measurement set instead of a simulated
/// room: points with role "listener" become the designed listeners, "mic"
/// points become the extra evaluation points.
SceneBundle build_measured_scene(const ScenarioConfig& cfg);

/// A finished drive of either method plus everything needed to evaluate,
/// serialize, or re-render it.
struct DesignOutput {
    std::string method;
    std::vector<Signal> drive;      // per speaker, after any power normalization
    std::vector<long> latencies;    // per-listener delivery delay, samples
    std::vector<long> window_lens;  // usable samples of each delayed message
    double scale = 1.0;             // power-normalization factor applied to the drive
    SolveReport report;             // filter solve (mccs) or carrier solve (nullspace)
    SolveReport projection_report;  // nullspace only; iterations == 0 otherwise
    std::uint64_t seed = 0;
    double noise_std = 1.0;
};

/// Runs one design ("mccs" or "nullspace") against the given channels and
/// messages, honoring the solver and power-normalization settings in `spec`.
DesignOutput run_design(const std::string& method, const ChannelSet& channels,
                        const MessageSet& msgs, const DesignSpec& spec, std::uint64_t seed);

/// Reconstruction metrics at designed listener k, evaluated on k's delivery
/// window: the rendered segment [latency, latency + window_len) against the
/// message head scaled by the drive's normalization factor.
struct ListenerScore {
    double stoi = 0.0;
    double rel_err = 0.0;
    double rel_err_optscale = 0.0;
    double snr_db = 0.0;
    long lag = 0;
};
ListenerScore score_listener(const DesignOutput& d, const MessageSet& msgs,
                             const Signal& rendered, int k);

/// Best intelligibility an eavesdropper at this render could reach: the max
/// over designed listeners k of STOI between k's in-window message and the
/// matching segment of the render.
double score_offspot(const DesignOutput& d, const MessageSet& msgs, const Signal& rendered);

// Scenario runners. Each returns the rows of results.csv; figures are
// rendered separately from the written CSV.
ResultTable run_reconstruction_demo(const ScenarioConfig& cfg);
ResultTable run_heatmap(const ScenarioConfig& cfg);
ResultTable run_noise_variance_sweep(const ScenarioConfig& cfg);
ResultTable run_noise_length_sweep(const ScenarioConfig& cfg);
ResultTable run_robustness(const ScenarioConfig& cfg);
ResultTable run_measured(const ScenarioConfig& cfg);

/// A channel-measurement set on disk: rirs.json plus one multichannel WAV
/// per point (channel i = path from speaker i). kind "rir" stores impulse
/// responses directly; kind "sweep" stores recorded sweep responses that are
/// deconvolved against the referenced excitation on import.
struct RirSet {
    std::vector<Point> speakers;
    std::vector<Point> points;
    std::vector<std::string> roles;         // "listener" or "mic", one per point
    std::vector<std::vector<Signal>> rirs;  // [point][speaker]
    double sample_rate_hz = 16000.0;
};

/// Simulates speaker->point channels for the configured room (listeners
/// first, then extra points as "mic" roles) and writes them as an importable
/// set. Float64 storage makes re-import lossless.
void export_rir_set(const ScenarioConfig& cfg, const std::string& out_dir);

/// Reads a set written by export_rir_set or assembled by hand in the same
/// layout. Missing or short files are rejected naming the offending file.
/// For sweep sets, `fallback_reference` supplies the excitation file when
/// the manifest does not name one.
RirSet import_rir_set(const std::string& dir, long rir_len,
                      const std::string& fallback_reference = "");

/// Serializes a design (drive.wav + design.json) so a later render run
/// reproduces the emitted signals bit for bit.
void export_design(const std::string& dir, const DesignOutput& d,
                   const std::string& config_hash, double sample_rate_hz);
DesignOutput import_design(const std::string& dir);

}  // namespace privaudio
