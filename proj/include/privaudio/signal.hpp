#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace privaudio {

/// Finite real-valued sequence with its sample rate. Immutable by convention:
/// operations return new signals.
struct Signal {
    std::vector<double> samples;
    double sample_rate_hz = 0.0;

    Signal() = default;
    Signal(std::vector<double> s, double rate) : samples(std::move(s)), sample_rate_hz(rate) {}

    static Signal zeros(long len, double rate) {
        return Signal(std::vector<double>(static_cast<std::size_t>(len), 0.0), rate);
    }

    long size() const { return static_cast<long>(samples.size()); }
    bool empty() const { return samples.empty(); }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

/// Throws InvalidInput unless all samples are finite and the rate is positive.
void validate_signal(const Signal& s, const std::string& name);

/// Linear convolution via FFT (next power of two >= len(a)+len(b)-1).
/// Output length is len(a)+len(b)-1. Rates must match.
Signal fft_convolve(const Signal& a, const Signal& b);

/// Raw-buffer variant used by the operator machinery.
std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b);

/// Mean squared sample value.
double power(const Signal& a);

/// Copy of samples [start, start+len) as a new signal at the same rate.
Signal segment(const Signal& a, long start, long len);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

/// Problem dimensions shared across the design pipeline.
///
/// Invariants: drive_len = message_len - rir_len + 1, and in noise-filter mode
/// filter_len + noise_len - 1 = drive_len.
struct ProblemDims {
    int speakers = 0;      // L
    int listeners = 0;     // K
    long message_len = 0;  // per-listener message length
    long rir_len = 0;      // channel impulse response length
    long drive_len = 0;    // per-speaker emitted length
    long filter_len = 0;   // per-speaker filter length (noise-filter mode only)
    long noise_len = 0;    // per-speaker noise length (noise-filter mode only)

    static ProblemDims make(int speakers, int listeners, long message_len, long rir_len);

    /// Returns a copy with noise_len set and filter_len = drive_len - noise_len + 1.
    ProblemDims with_noise_split(long noise_len) const;

    bool noise_filter_mode() const { return noise_len > 0; }

    long stacked_message_len() const { return message_len * listeners; }
    long stacked_drive_len() const { return drive_len * speakers; }
    long stacked_filter_len() const { return filter_len * speakers; }

    void validate() const;
};

}  // namespace privaudio
