#include "privaudio/signal.hpp"

#include <cmath>
#include <complex>
#include <cstring>

#include "privaudio/errors.hpp"
#include "privaudio/fft.hpp"

namespace privaudio {

void validate_signal(const Signal& s, const std::string& name) {
    if (!(s.sample_rate_hz > 0.0)) {
        throw InvalidInput(name + ": sample rate must be positive");
    }
    for (double v : s.samples) {
        if (!std::isfinite(v)) {
            throw InvalidInput(name + ": non-finite sample");
        }
    }
}

std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) {
        throw InvalidInput("fft_convolve: empty input");
    }
    const std::size_t out_len = a.size() + b.size() - 1;
    RealFft fft(next_pow2(out_len));
    auto sa = fft.spectrum(a.data(), a.size());
    auto sb = fft.spectrum(b.data(), b.size());
    for (std::size_t i = 0; i < sa.size(); ++i) {
        sa[i] *= sb[i];
    }
    std::vector<double> full(fft.size());
    fft.inverse(sa.data(), full.data());
    full.resize(out_len);
    return full;
}

Signal fft_convolve(const Signal& a, const Signal& b) {
    if (a.sample_rate_hz != b.sample_rate_hz) {
        throw InvalidInput("fft_convolve: sample rates differ");
    }
    return Signal(fft_convolve(a.samples, b.samples), a.sample_rate_hz);
}

double power(const Signal& a) {
    if (a.empty()) {
        throw InvalidInput("power: empty signal");
    }
    double acc = 0.0;
    for (double v : a.samples) {
        acc += v * v;
    }
    return acc / static_cast<double>(a.size());
}

Signal segment(const Signal& a, long start, long len) {
    if (start < 0 || len < 1 || start + len > a.size()) {
        throw InvalidInput("segment: range out of bounds");
    }
    return Signal(std::vector<double>(a.samples.begin() + start, a.samples.begin() + start + len),
                  a.sample_rate_hz);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double norm2(const std::vector<double>& a) {
    return std::sqrt(dot(a, a));
}

ProblemDims ProblemDims::make(int speakers, int listeners, long message_len, long rir_len) {
    ProblemDims d;
    d.speakers = speakers;
    d.listeners = listeners;
    d.message_len = message_len;
    d.rir_len = rir_len;
    d.drive_len = message_len - rir_len + 1;
    d.validate();
    return d;
}

ProblemDims ProblemDims::with_noise_split(long noise_len) const {
    ProblemDims d(*this);
    d.noise_len = noise_len;
    d.filter_len = d.drive_len - noise_len + 1;
    d.validate();
    return d;
}

void ProblemDims::validate() const {
    if (speakers < 1 || listeners < 1) {
        throw InvalidInput("dims: need at least one speaker and one listener");
    }
    if (rir_len < 1 || message_len <= rir_len) {
        throw InvalidInput("dims: require message_len > rir_len >= 1");
    }
    if (drive_len != message_len - rir_len + 1) {
        throw InvalidInput("dims: drive_len must equal message_len - rir_len + 1");
    }
    if (noise_len != 0 || filter_len != 0) {
        if (noise_len < 1 || filter_len < 1) {
            throw InvalidInput("dims: noise and filter lengths must be >= 1");
        }
        if (filter_len + noise_len - 1 != drive_len) {
            throw InvalidInput("dims: filter_len + noise_len - 1 must equal drive_len");
        }
    }
}

}  // namespace privaudio
