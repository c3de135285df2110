#include "privaudio/channel.hpp"

#include <algorithm>
#include <cmath>

#include "privaudio/errors.hpp"
#include "privaudio/fft.hpp"
#include "privaudio/philox.hpp"

namespace privaudio {

ChannelSet ChannelSet::make(std::vector<std::vector<Signal>> rirs, long message_len) {
    if (rirs.empty() || rirs.front().empty()) {
        throw InvalidInput("channel: need at least one listener and one speaker");
    }
    const int listeners = static_cast<int>(rirs.size());
    const int speakers = static_cast<int>(rirs.front().size());
    const long rir_len = rirs.front().front().size();

    ChannelSet set;
    set.rirs = std::move(rirs);
    set.dims = ProblemDims::make(speakers, listeners, message_len, rir_len);
    set.validate();
    return set;
}

double ChannelSet::sample_rate_hz() const { return rirs.front().front().sample_rate_hz; }

void ChannelSet::validate() const {
    dims.validate();
    if (static_cast<int>(rirs.size()) != dims.listeners) {
        throw InvalidInput("channel: listener count does not match dims");
    }
    const double rate = rirs.front().front().sample_rate_hz;
    for (const auto& row : rirs) {
        if (static_cast<int>(row.size()) != dims.speakers) {
            throw InvalidInput("channel: speaker count does not match dims");
        }
        for (const Signal& rir : row) {
            validate_signal(rir, "rir");
            if (rir.size() != dims.rir_len) throw InvalidInput("channel: RIR lengths differ");
            if (rir.sample_rate_hz != rate) throw InvalidInput("channel: RIR sample rates differ");
            bool nonzero = false;
            for (double v : rir.samples) {
                if (v != 0.0) {
                    nonzero = true;
                    break;
                }
            }
            if (!nonzero) throw InvalidInput("channel: all-zero RIR");
        }
    }
}

NoiseBank NoiseBank::generate(int speakers, long noise_len, double std_dev, std::uint64_t seed,
                              double sample_rate_hz) {
    if (speakers < 1) throw InvalidInput("noise bank: need at least one speaker");
    if (noise_len < 1) throw InvalidInput("noise bank: noise length must be positive");
    if (!(std_dev > 0.0) || !std::isfinite(std_dev)) {
        throw InvalidInput("noise bank: std deviation must be positive and finite");
    }
    NoiseBank bank;
    bank.std_dev = std_dev;
    bank.seed = seed;
    bank.noises.reserve(speakers);
    for (int i = 0; i < speakers; ++i) {
        Signal n = Signal::zeros(noise_len, sample_rate_hz);
        Philox(seed, static_cast<std::uint64_t>(i)).fill_normal(n.samples.data(), noise_len);
        if (std_dev != 1.0) {
            for (double& v : n.samples) v *= std_dev;
        }
        bank.noises.push_back(std::move(n));
    }
    return bank;
}

std::vector<double> LinearOperator::apply(const std::vector<double>& in) const {
    if (static_cast<long>(in.size()) != in_dim()) {
        throw InvalidInput("operator: apply input length mismatch");
    }
    std::vector<double> out(out_dim());
    apply(in.data(), out.data());
    return out;
}

std::vector<double> LinearOperator::adjoint(const std::vector<double>& in) const {
    if (static_cast<long>(in.size()) != out_dim()) {
        throw InvalidInput("operator: adjoint input length mismatch");
    }
    std::vector<double> out(in_dim());
    adjoint(in.data(), out.data());
    return out;
}

MimoConvOperator::MimoConvOperator(std::vector<std::vector<std::vector<double>>> kernels,
                                   long in_block_len, long out_block_len, RowWindows row_windows) {
    if (kernels.empty() || kernels.front().empty()) {
        throw InvalidInput("operator: kernel grid must be nonempty");
    }
    listeners_ = static_cast<int>(kernels.size());
    speakers_ = static_cast<int>(kernels.front().size());
    in_block_ = in_block_len;
    out_block_ = out_block_len;
    if (in_block_ < 1 || out_block_ < 1) throw InvalidInput("operator: block lengths must be positive");
    if (!row_windows.empty()) {
        if (static_cast<int>(row_windows.size()) != listeners_) {
            throw InvalidInput("operator: one row window per listener required");
        }
        for (const auto& [start, end] : row_windows) {
            if (start < 0 || start >= end || end > out_block_) {
                throw InvalidInput("operator: row window out of range");
            }
        }
    }
    windows_ = std::move(row_windows);

    long kernel_len = 0;
    for (const auto& row : kernels) {
        if (static_cast<int>(row.size()) != speakers_) {
            throw InvalidInput("operator: ragged kernel grid");
        }
        for (const auto& k : row) {
            if (k.empty()) throw InvalidInput("operator: empty kernel");
            kernel_len = std::max(kernel_len, static_cast<long>(k.size()));
        }
    }
    // The FFT length must hold a full linear convolution so circular wraparound
    // never aliases into either the truncated output or the adjoint.
    fft_len_ = next_pow2(std::max(in_block_ + kernel_len - 1, out_block_));
    spec_len_ = fft_len_ / 2 + 1;

    RealFft fft(fft_len_);
    std::vector<double> padded(fft_len_);
    spectra_.resize(static_cast<size_t>(listeners_) * speakers_);
    for (int k = 0; k < listeners_; ++k) {
        for (int i = 0; i < speakers_; ++i) {
            std::fill(padded.begin(), padded.end(), 0.0);
            const auto& kernel = kernels[k][i];
            std::copy(kernel.begin(), kernel.end(), padded.begin());
            auto& spec = spectra_[static_cast<size_t>(k) * speakers_ + i];
            spec.resize(spec_len_);
            fft.forward(padded.data(), spec.data());
        }
    }
}

MimoConvOperator MimoConvOperator::channel(const ChannelSet& channels, RowWindows row_windows) {
    channels.validate();
    std::vector<std::vector<std::vector<double>>> kernels(channels.dims.listeners);
    for (int k = 0; k < channels.dims.listeners; ++k) {
        kernels[k].reserve(channels.dims.speakers);
        for (int i = 0; i < channels.dims.speakers; ++i) {
            kernels[k].push_back(channels.rirs[k][i].samples);
        }
    }
    return MimoConvOperator(std::move(kernels), channels.dims.drive_len,
                            channels.dims.message_len, std::move(row_windows));
}

MimoConvOperator MimoConvOperator::filtered(const ChannelSet& channels, const NoiseBank& bank,
                                            RowWindows row_windows) {
    channels.validate();
    const ProblemDims& dims = channels.dims;
    if (!dims.noise_filter_mode()) {
        throw InvalidInput("operator: dims carry no noise/filter split");
    }
    if (static_cast<int>(bank.noises.size()) != dims.speakers) {
        throw InvalidInput("operator: noise bank speaker count mismatch");
    }
    std::vector<std::vector<std::vector<double>>> kernels(dims.listeners);
    for (int k = 0; k < dims.listeners; ++k) {
        kernels[k].reserve(dims.speakers);
        for (int i = 0; i < dims.speakers; ++i) {
            if (bank.noises[i].size() != dims.noise_len) {
                throw InvalidInput("operator: noise length does not match dims");
            }
            kernels[k].push_back(
                fft_convolve(channels.rirs[k][i].samples, bank.noises[i].samples));
        }
    }
    return MimoConvOperator(std::move(kernels), dims.filter_len, dims.message_len,
                            std::move(row_windows));
}

void MimoConvOperator::apply(const double* in, double* out) const {
    RealFft fft(fft_len_);
    std::vector<std::vector<std::complex<double>>> in_spec(speakers_);
    std::vector<double> padded(fft_len_);
    for (int i = 0; i < speakers_; ++i) {
        std::fill(padded.begin(), padded.end(), 0.0);
        std::copy(in + static_cast<size_t>(i) * in_block_,
                  in + static_cast<size_t>(i + 1) * in_block_, padded.begin());
        in_spec[i].resize(spec_len_);
        fft.forward(padded.data(), in_spec[i].data());
    }

    std::vector<std::complex<double>> acc(spec_len_);
    std::vector<double> time(fft_len_);
    for (int k = 0; k < listeners_; ++k) {
        std::fill(acc.begin(), acc.end(), std::complex<double>(0.0, 0.0));
        for (int i = 0; i < speakers_; ++i) {
            const auto& spec = spectra_[static_cast<size_t>(k) * speakers_ + i];
            for (long f = 0; f < spec_len_; ++f) acc[f] += spec[f] * in_spec[i][f];
        }
        fft.inverse(acc.data(), time.data());
        double* block = out + static_cast<size_t>(k) * out_block_;
        if (windows_.empty()) {
            std::copy(time.begin(), time.begin() + out_block_, block);
        } else {
            const auto [start, end] = windows_[static_cast<size_t>(k)];
            std::fill(block, block + out_block_, 0.0);
            std::copy(time.begin() + start, time.begin() + end, block + start);
        }
    }
}

void MimoConvOperator::adjoint(const double* in, double* out) const {
    RealFft fft(fft_len_);
    std::vector<std::vector<std::complex<double>>> in_spec(listeners_);
    std::vector<double> padded(fft_len_);
    for (int k = 0; k < listeners_; ++k) {
        std::fill(padded.begin(), padded.end(), 0.0);
        const double* block = in + static_cast<size_t>(k) * out_block_;
        if (windows_.empty()) {
            std::copy(block, block + out_block_, padded.begin());
        } else {
            const auto [start, end] = windows_[static_cast<size_t>(k)];
            std::copy(block + start, block + end, padded.begin() + start);
        }
        in_spec[k].resize(spec_len_);
        fft.forward(padded.data(), in_spec[k].data());
    }

    std::vector<std::complex<double>> acc(spec_len_);
    std::vector<double> time(fft_len_);
    for (int i = 0; i < speakers_; ++i) {
        std::fill(acc.begin(), acc.end(), std::complex<double>(0.0, 0.0));
        for (int k = 0; k < listeners_; ++k) {
            const auto& spec = spectra_[static_cast<size_t>(k) * speakers_ + i];
            for (long f = 0; f < spec_len_; ++f) acc[f] += std::conj(spec[f]) * in_spec[k][f];
        }
        fft.inverse(acc.data(), time.data());
        std::copy(time.begin(), time.begin() + in_block_, out + static_cast<size_t>(i) * in_block_);
    }
}

ConditionCheck check_mccs_condition(const ProblemDims& dims) {
    dims.validate();
    if (!dims.noise_filter_mode()) {
        throw InvalidInput("condition check: dims carry no noise/filter split");
    }
    ConditionCheck check;
    check.margin = static_cast<long>(dims.speakers) * dims.filter_len -
                   dims.message_len * dims.listeners;
    check.pass = check.margin >= 0;
    return check;
}

NullspaceCheck check_nullspace_conditions(const ProblemDims& dims, const ChannelSet& channels) {
    dims.validate();
    channels.validate();

    NullspaceCheck check;
    check.covers_message = dims.drive_len + dims.rir_len - 1 >= dims.message_len;
    check.enough_columns =
        static_cast<long>(dims.speakers) * dims.drive_len >= dims.message_len * dims.listeners;

    long max_spread = 0;
    for (const auto& row : channels.rirs) {
        long earliest = row.front().size();
        long latest = 0;
        for (const Signal& rir : row) {
            const long onset = first_arrival(rir);
            earliest = std::min(earliest, onset);
            latest = std::max(latest, onset);
        }
        max_spread = std::max(max_spread, latest - earliest);
    }
    check.max_relative_delay = max_spread;
    check.delay_ok = dims.drive_len > max_spread;
    return check;
}

long first_arrival(const Signal& rir) {
    validate_signal(rir, "rir");
    double peak = 0.0;
    for (double v : rir.samples) peak = std::max(peak, std::fabs(v));
    if (peak == 0.0) throw InvalidInput("first_arrival: all-zero RIR");
    const double threshold = 0.01 * peak;
    for (long t = 0; t < rir.size(); ++t) {
        if (std::fabs(rir.samples[t]) > threshold) return t;
    }
    throw InvalidInput("first_arrival: no tap above threshold");  // unreachable
}

RowWindows delivery_windows(const ChannelSet& channels) {
    channels.validate();
    const ProblemDims& dims = channels.dims;
    // Guard past the strongest arrival so every in-window output sample is
    // reachable at full direct-path strength. Output rows reachable only
    // through the leading ramp of a band-limited arrival couple at a tiny
    // fraction of peak and poison the conditioning of every design solve;
    // one ramp width (2.5 ms at 16 kHz) clears them.
    constexpr long kGuard = 40;
    RowWindows windows;
    windows.reserve(static_cast<size_t>(dims.listeners));
    for (int k = 0; k < dims.listeners; ++k) {
        long earliest = dims.rir_len;
        for (int i = 0; i < dims.speakers; ++i) {
            const Signal& rir = channels.rirs[k][i];
            long peak_t = 0;
            double peak = -1.0;
            for (long t = 0; t < rir.size(); ++t) {
                const double a = std::fabs(rir.samples[t]);
                if (a > peak) {
                    peak = a;
                    peak_t = t;
                }
            }
            earliest = std::min(earliest, peak_t);
        }
        const long start = earliest + kGuard;
        const long end = std::min(start + dims.drive_len, dims.message_len);
        if (start >= end) {
            throw InvalidInput("delivery window: channel latency leaves no usable output");
        }
        windows.emplace_back(start, end);
    }
    return windows;
}

}  // namespace privaudio
