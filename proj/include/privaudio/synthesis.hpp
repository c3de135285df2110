#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "privaudio/channel.hpp"
#include "privaudio/solver.hpp"

namespace privaudio {

/// The K intended messages, one per listener, equal length and rate.
struct MessageSet {
    std::vector<Signal> messages;

    static MessageSet make(std::vector<Signal> messages);
    int listeners() const { return static_cast<int>(messages.size()); }
    long message_len() const { return messages.front().size(); }
    double sample_rate_hz() const { return messages.front().sample_rate_hz; }
    std::vector<double> stacked() const;  // y_1 .. y_K concatenated
    void validate() const;
};

/// The messages each listener actually receives: message k shifted right by
/// latencies[k] samples, zero-filled in front, truncated to its length.
/// Reconstruction metrics compare renders against this reference.
MessageSet delayed_messages(const MessageSet& msgs, const std::vector<long>& latencies);

/// Restricts each delayed message to its delivery window, zeroing samples the
/// drive cannot control (before the wavefront, and past the window where only
/// the decaying reverb tail remains). This is the right-hand side both
/// designs solve against.
MessageSet windowed_messages(const MessageSet& msgs, const RowWindows& windows);

/// Noise-times-filter drive design: speaker i emits x_i = n_i * g_i with the
/// bank fixed by (seed, noise_std) and the filters solved so the channel
/// delivers each message inside its listener's delivery window. The filter
/// solve is independent of noise_std (filters absorb 1/std), so `drive`
/// depends only on the seed.
struct MccsDesign {
    NoiseBank bank;
    std::vector<Signal> filters;  // g_i, length dims.filter_len
    std::vector<Signal> drive;    // x_i = n_i * g_i, length dims.drive_len
    std::vector<long> latencies;  // per-listener delivery delay, samples
    std::vector<long> window_lens;  // usable samples of each delayed message
    SolveReport report;
    ProblemDims dims;
    std::uint64_t seed = 0;
    double noise_std = 1.0;
};

/// Carrier-plus-jam drive design: x = s + w where s is the minimum-norm
/// drive reproducing the windowed messages through the channel and w is the
/// component of a random vector invisible inside the delivery windows, so
/// the jam never reaches the designed listeners where it matters.
struct NullspaceDesign {
    std::vector<Signal> carrier;  // s_i, length dims.drive_len
    std::vector<Signal> jam;      // w_i = (v - H'z)_i
    std::vector<Signal> drive;    // x_i = s_i + w_i
    std::vector<double> coeffs;   // z, length stacked_message_len
    std::vector<long> latencies;  // per-listener delivery delay, samples
    std::vector<long> window_lens;  // usable samples of each delayed message
    SolveReport carrier_report;
    SolveReport projection_report;
    ProblemDims dims;
    std::uint64_t seed = 0;
    double noise_std = 0.0;
};

/// Solves the filter-design least squares on a unit-variance noise bank and
/// rescales, so the same seed at any noise_std yields the same drive.
/// Throws InfeasibleError (with the sample-count margin) when the stacked
/// system has fewer unknowns than equations.
MccsDesign design_mccs(const ChannelSet& channels, const MessageSet& msgs, long noise_len,
                       double noise_std, std::uint64_t seed, const SolveOptions& opts = {});

/// Carrier solve plus nullspace projection of a seeded normal vector with the
/// given std. The projection runs once at unit scale; the jam is linear in
/// noise_std by construction. Projection default tolerance is tighter than
/// the carrier's so the jam stays inaudible at listeners even for large std.
NullspaceDesign design_nullspace(const ChannelSet& channels, const MessageSet& msgs,
                                 double noise_std, std::uint64_t seed,
                                 const SolveOptions& carrier_opts = {},
                                 const SolveOptions& projection_opts = {1e-8, 2000});

/// One global scalar bringing the mean sample power across all speakers to
/// target_power; returns (scaled drive, scale factor applied).
std::pair<std::vector<Signal>, double> normalize_power(const std::vector<Signal>& drive,
                                                       double target_power);

/// Received signal at a point: sum_i rirs[i] * drive[i]. Default output
/// length is the full convolution drive_len + rir_len - 1.
Signal render_at(const std::vector<Signal>& drive, const std::vector<Signal>& rirs,
                 long out_len = -1);

/// Zeroes the drives of speakers outside keep_set (0-based indices).
std::vector<Signal> apply_dropout(const std::vector<Signal>& drive,
                                  const std::vector<int>& keep_set);

/// Adds seeded white Gaussian noise to every RIR, scaled per RIR so that
/// ||rir||^2 / ||noise||^2 matches rir_snr_db exactly. An infinite SNR
/// returns an identical copy.
ChannelSet perturb_channels(const ChannelSet& channels, double rir_snr_db, std::uint64_t seed);

}  // namespace privaudio
