#include "privaudio/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "privaudio/errors.hpp"
#include "privaudio/philox.hpp"

namespace privaudio {
namespace {

std::vector<Signal> split_blocks(const std::vector<double>& stacked, int blocks, long block_len,
                                 double rate) {
    std::vector<Signal> out;
    out.reserve(blocks);
    for (int i = 0; i < blocks; ++i) {
        Signal s = Signal::zeros(block_len, rate);
        std::copy(stacked.begin() + static_cast<size_t>(i) * block_len,
                  stacked.begin() + static_cast<size_t>(i + 1) * block_len, s.samples.begin());
        out.push_back(std::move(s));
    }
    return out;
}

void check_design_inputs(const ChannelSet& channels, const MessageSet& msgs) {
    channels.validate();
    msgs.validate();
    if (msgs.listeners() != channels.dims.listeners) {
        throw InvalidInput("design: message count does not match listener count");
    }
    if (msgs.message_len() != channels.dims.message_len) {
        throw InvalidInput("design: message length does not match channel dims");
    }
    if (msgs.sample_rate_hz() != channels.sample_rate_hz()) {
        throw InvalidInput("design: message and channel sample rates differ");
    }
}

}  // namespace

MessageSet windowed_messages(const MessageSet& msgs, const RowWindows& windows) {
    if (windows.size() != msgs.messages.size()) {
        throw InvalidInput("windowed_messages: one window per listener required");
    }
    std::vector<Signal> cropped;
    cropped.reserve(msgs.messages.size());
    for (size_t k = 0; k < msgs.messages.size(); ++k) {
        const Signal& m = msgs.messages[k];
        const auto [start, end] = windows[k];
        if (start < 0 || start >= end || end > m.size()) {
            throw InvalidInput("windowed_messages: window out of range");
        }
        Signal out = Signal::zeros(m.size(), m.sample_rate_hz);
        std::copy(m.samples.begin() + start, m.samples.begin() + end,
                  out.samples.begin() + start);
        cropped.push_back(std::move(out));
    }
    MessageSet set;
    set.messages = std::move(cropped);
    return set;
}

MessageSet delayed_messages(const MessageSet& msgs, const std::vector<long>& latencies) {
    if (latencies.size() != msgs.messages.size()) {
        throw InvalidInput("delayed_messages: one latency per listener required");
    }
    std::vector<Signal> delayed;
    delayed.reserve(msgs.messages.size());
    for (size_t k = 0; k < msgs.messages.size(); ++k) {
        const Signal& m = msgs.messages[k];
        const long d = latencies[k];
        if (d < 0 || d > m.size()) throw InvalidInput("delayed_messages: latency out of range");
        Signal out = Signal::zeros(m.size(), m.sample_rate_hz);
        for (long t = d; t < m.size(); ++t) out.samples[t] = m.samples[t - d];
        delayed.push_back(std::move(out));
    }
    MessageSet set;
    set.messages = std::move(delayed);
    return set;
}

MessageSet MessageSet::make(std::vector<Signal> messages) {
    MessageSet set;
    set.messages = std::move(messages);
    set.validate();
    return set;
}

void MessageSet::validate() const {
    if (messages.empty()) throw InvalidInput("messages: need at least one listener message");
    const long len = messages.front().size();
    const double rate = messages.front().sample_rate_hz;
    for (const Signal& m : messages) {
        validate_signal(m, "message");
        if (m.size() != len) throw InvalidInput("messages: lengths differ");
        if (m.sample_rate_hz != rate) throw InvalidInput("messages: sample rates differ");
    }
}

std::vector<double> MessageSet::stacked() const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(listeners()) * message_len());
    for (const Signal& m : messages) {
        out.insert(out.end(), m.samples.begin(), m.samples.end());
    }
    return out;
}

MccsDesign design_mccs(const ChannelSet& channels, const MessageSet& msgs, long noise_len,
                       double noise_std, std::uint64_t seed, const SolveOptions& opts) {
    check_design_inputs(channels, msgs);
    if (!(noise_std > 0.0) || !std::isfinite(noise_std)) {
        throw InvalidInput("design: noise_std must be positive and finite");
    }

    MccsDesign design;
    design.dims = channels.dims.with_noise_split(noise_len);
    design.seed = seed;
    design.noise_std = noise_std;

    const ConditionCheck check = check_mccs_condition(design.dims);
    if (!check.pass) {
        throw InfeasibleError("design: fewer filter unknowns than message samples", check.margin);
    }

    // Solve on the unit-variance bank: the optimal filters for std-scaled
    // noise are exactly the unit filters divided by std, so the drive below
    // does not depend on noise_std at all.
    ChannelSet sized = channels;
    sized.dims = design.dims;
    const double rate = channels.sample_rate_hz();
    const RowWindows windows = delivery_windows(channels);
    for (const auto& [start, end] : windows) {
        design.latencies.push_back(start);
        design.window_lens.push_back(end - start);
    }
    const NoiseBank unit = NoiseBank::generate(design.dims.speakers, noise_len, 1.0, seed, rate);
    const MimoConvOperator hn = MimoConvOperator::filtered(sized, unit, windows);
    const MessageSet target = windowed_messages(delayed_messages(msgs, design.latencies), windows);
    auto [unit_filters, report] = cgls(hn, target.stacked(), opts);
    design.report = std::move(report);

    design.bank = NoiseBank::generate(design.dims.speakers, noise_len, noise_std, seed, rate);
    design.filters = split_blocks(unit_filters, design.dims.speakers, design.dims.filter_len, rate);
    for (Signal& g : design.filters) {
        for (double& v : g.samples) v /= noise_std;
    }
    design.drive.reserve(design.dims.speakers);
    for (int i = 0; i < design.dims.speakers; ++i) {
        design.drive.push_back(fft_convolve(design.bank.noises[i], design.filters[i]));
    }
    return design;
}

NullspaceDesign design_nullspace(const ChannelSet& channels, const MessageSet& msgs,
                                 double noise_std, std::uint64_t seed,
                                 const SolveOptions& carrier_opts,
                                 const SolveOptions& projection_opts) {
    check_design_inputs(channels, msgs);
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
        throw InvalidInput("design: noise_std must be nonnegative and finite");
    }

    NullspaceDesign design;
    design.dims = channels.dims;
    design.seed = seed;
    design.noise_std = noise_std;

    const NullspaceCheck check = check_nullspace_conditions(design.dims, channels);
    if (!check.covers_message) {
        throw InfeasibleError("design: drive too short to cover the message window",
                              design.dims.drive_len + design.dims.rir_len - 1 -
                                  design.dims.message_len);
    }
    if (!check.enough_columns) {
        throw InfeasibleError("design: stacked channel matrix has more rows than columns",
                              static_cast<long>(design.dims.speakers) * design.dims.drive_len -
                                  design.dims.stacked_message_len());
    }

    const double rate = channels.sample_rate_hz();
    const RowWindows windows = delivery_windows(channels);
    for (const auto& [start, end] : windows) {
        design.latencies.push_back(start);
        design.window_lens.push_back(end - start);
    }
    const MimoConvOperator h = MimoConvOperator::channel(channels, windows);
    const MessageSet target = windowed_messages(delayed_messages(msgs, design.latencies), windows);
    auto [carrier, carrier_report] = least_norm_carrier(h, target.stacked(), carrier_opts);
    design.carrier_report = std::move(carrier_report);
    design.carrier = split_blocks(carrier, design.dims.speakers, design.dims.drive_len, rate);

    if (noise_std == 0.0) {
        design.jam = std::vector<Signal>(design.dims.speakers,
                                         Signal::zeros(design.dims.drive_len, rate));
        design.coeffs.assign(design.dims.stacked_message_len(), 0.0);
        design.projection_report.converged = true;
        design.projection_report.tolerance = projection_opts.tol;
        design.drive = design.carrier;
        return design;
    }

    // Project a unit-variance draw and scale afterwards: one solve serves
    // every noise_std, and the jam is linear in noise_std by construction.
    std::vector<double> unit_noise(design.dims.stacked_drive_len());
    for (int i = 0; i < design.dims.speakers; ++i) {
        Philox(seed, static_cast<std::uint64_t>(i))
            .fill_normal(unit_noise.data() + static_cast<size_t>(i) * design.dims.drive_len,
                         design.dims.drive_len);
    }
    RowSpaceSplit split = row_space_residual(h, unit_noise, projection_opts);
    design.projection_report = std::move(split.report);
    for (double& v : split.residual) v *= noise_std;
    for (double& v : split.coeffs) v *= noise_std;
    design.jam = split_blocks(split.residual, design.dims.speakers, design.dims.drive_len, rate);
    design.coeffs = std::move(split.coeffs);

    design.drive.reserve(design.dims.speakers);
    for (int i = 0; i < design.dims.speakers; ++i) {
        Signal x = design.carrier[i];
        for (long t = 0; t < x.size(); ++t) x.samples[t] += design.jam[i].samples[t];
        design.drive.push_back(std::move(x));
    }
    return design;
}

std::pair<std::vector<Signal>, double> normalize_power(const std::vector<Signal>& drive,
                                                       double target_power) {
    if (drive.empty()) throw InvalidInput("normalize_power: empty drive");
    if (!(target_power > 0.0) || !std::isfinite(target_power)) {
        throw InvalidInput("normalize_power: target power must be positive and finite");
    }
    double sum_sq = 0.0;
    long count = 0;
    for (const Signal& x : drive) {
        validate_signal(x, "drive");
        for (double v : x.samples) sum_sq += v * v;
        count += x.size();
    }
    if (sum_sq == 0.0) throw InvalidInput("normalize_power: all-zero drive");

    const double scale = std::sqrt(target_power / (sum_sq / count));
    std::vector<Signal> scaled = drive;
    for (Signal& x : scaled) {
        for (double& v : x.samples) v *= scale;
    }
    return {std::move(scaled), scale};
}

Signal render_at(const std::vector<Signal>& drive, const std::vector<Signal>& rirs,
                 long out_len) {
    if (drive.empty() || drive.size() != rirs.size()) {
        throw InvalidInput("render: drive and RIR counts differ");
    }
    const long full_len = drive.front().size() + rirs.front().size() - 1;
    if (out_len < 0) out_len = full_len;
    if (out_len > full_len) throw InvalidInput("render: output length exceeds convolution length");

    Signal out = Signal::zeros(out_len, drive.front().sample_rate_hz);
    for (size_t i = 0; i < drive.size(); ++i) {
        if (drive[i].size() != drive.front().size() || rirs[i].size() != rirs.front().size()) {
            throw InvalidInput("render: ragged drive or RIR lengths");
        }
        if (drive[i].sample_rate_hz != rirs[i].sample_rate_hz) {
            throw InvalidInput("render: drive and RIR sample rates differ");
        }
        const Signal path = fft_convolve(drive[i], rirs[i]);
        for (long t = 0; t < out_len; ++t) out.samples[t] += path.samples[t];
    }
    return out;
}

std::vector<Signal> apply_dropout(const std::vector<Signal>& drive,
                                  const std::vector<int>& keep_set) {
    if (keep_set.empty()) throw InvalidInput("dropout: keep set must be nonempty");
    std::vector<bool> keep(drive.size(), false);
    for (int i : keep_set) {
        if (i < 0 || i >= static_cast<int>(drive.size())) {
            throw InvalidInput("dropout: speaker index out of range");
        }
        keep[i] = true;
    }
    std::vector<Signal> out = drive;
    for (size_t i = 0; i < out.size(); ++i) {
        if (!keep[i]) std::fill(out[i].samples.begin(), out[i].samples.end(), 0.0);
    }
    return out;
}

ChannelSet perturb_channels(const ChannelSet& channels, double rir_snr_db, std::uint64_t seed) {
    channels.validate();
    if (std::isnan(rir_snr_db)) throw InvalidInput("perturb: SNR must not be NaN");
    if (std::isinf(rir_snr_db) && rir_snr_db > 0.0) return channels;
    if (std::isinf(rir_snr_db)) throw InvalidInput("perturb: SNR must be finite or +inf");

    ChannelSet noisy = channels;
    const double noise_over_signal = std::pow(10.0, -rir_snr_db / 20.0);
    for (int k = 0; k < noisy.dims.listeners; ++k) {
        for (int i = 0; i < noisy.dims.speakers; ++i) {
            Signal& rir = noisy.rirs[k][i];
            std::vector<double> noise(rir.size());
            const std::uint64_t stream =
                static_cast<std::uint64_t>(k) * noisy.dims.speakers + i;
            Philox(seed, stream).fill_normal(noise.data(), rir.size());
            // Normalize the draw by its own norm so the per-RIR SNR is exact,
            // not just exact in expectation.
            const double noise_norm = norm2(noise);
            if (noise_norm == 0.0) continue;
            const double scale = norm2(rir.samples) * noise_over_signal / noise_norm;
            for (long t = 0; t < rir.size(); ++t) rir.samples[t] += scale * noise[t];
        }
    }
    return noisy;
}

}  // namespace privaudio
