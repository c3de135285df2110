#include "privaudio/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "privaudio/errors.hpp"

namespace privaudio {
namespace {

// Rate constant L of an exponential sweep, fitted from zero crossings: each
// crossing interval gives a local frequency estimate, and ln f is linear in
// time with slope 1/L.
double estimate_rate_constant(const Signal& sweep) {
    const double fs = sweep.sample_rate_hz;
    std::vector<double> times;
    times.reserve(sweep.size() / 2);
    for (long n = 0; n + 1 < sweep.size(); ++n) {
        const double a = sweep.samples[n];
        const double b = sweep.samples[n + 1];
        if (a == 0.0) {
            times.push_back(n / fs);
        } else if ((a < 0.0) != (b < 0.0)) {
            times.push_back((n + a / (a - b)) / fs);
        }
    }
    if (times.size() < 10) {
        throw InvalidInput("sweep: too few zero crossings to estimate the sweep rate");
    }

    // Least-squares fit of ln f against the interval midpoint.
    double sum_t = 0.0, sum_y = 0.0, sum_tt = 0.0, sum_ty = 0.0;
    long count = 0;
    for (size_t j = 0; j + 1 < times.size(); ++j) {
        const double dt = times[j + 1] - times[j];
        if (!(dt > 0.0)) continue;
        const double freq = 1.0 / (2.0 * dt);
        const double mid = 0.5 * (times[j] + times[j + 1]);
        const double y = std::log(freq);
        sum_t += mid;
        sum_y += y;
        sum_tt += mid * mid;
        sum_ty += mid * y;
        ++count;
    }
    const double denom = count * sum_tt - sum_t * sum_t;
    if (count < 8 || !(denom > 0.0)) {
        throw InvalidInput("sweep: zero crossings do not span enough time to fit a rate");
    }
    const double slope = (count * sum_ty - sum_t * sum_y) / denom;
    if (!(slope > 0.0) || !std::isfinite(slope)) {
        throw InvalidInput("sweep: signal is not an ascending exponential sweep");
    }
    return 1.0 / slope;
}

}  // namespace

Signal generate_ess(double f1_hz, double f2_hz, double duration_s, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0)) throw InvalidInput("sweep: sample rate must be positive");
    if (!(f1_hz > 0.0) || !(f2_hz > f1_hz) || !(f2_hz < sample_rate_hz / 2.0)) {
        throw InvalidInput("sweep: need 0 < f1 < f2 < fs/2");
    }
    if (!(duration_s > 0.0)) throw InvalidInput("sweep: duration must be positive");

    const long len = std::lround(duration_s * sample_rate_hz);
    if (len < 2) throw InvalidInput("sweep: duration too short for the sample rate");
    const double rate = duration_s / std::log(f2_hz / f1_hz);
    Signal out = Signal::zeros(len, sample_rate_hz);
    for (long n = 0; n < len; ++n) {
        const double t = n / sample_rate_hz;
        out.samples[n] = std::sin(2.0 * M_PI * f1_hz * rate * std::expm1(t / rate));
    }
    return out;
}

DeconvolvedRir deconvolve_rir(const Signal& recording, const Signal& sweep, long rir_len) {
    validate_signal(recording, "recording");
    validate_signal(sweep, "sweep");
    if (recording.sample_rate_hz != sweep.sample_rate_hz) {
        throw InvalidInput("sweep: recording and sweep sample rates differ");
    }
    if (recording.size() < sweep.size()) {
        throw InvalidInput("sweep: recording is shorter than the sweep");
    }
    if (rir_len < 1) throw InvalidInput("sweep: rir_len must be at least 1");
    if (power(recording) == 0.0) throw InvalidInput("sweep: recording is silent");

    // Farina inverse filter: time-reversed sweep with an exponential envelope
    // that cancels the sweep's pink (-3 dB/octave) energy slope.
    const double rate = estimate_rate_constant(sweep);
    const double fs = sweep.sample_rate_hz;
    Signal inverse = Signal::zeros(sweep.size(), fs);
    for (long n = 0; n < sweep.size(); ++n) {
        inverse.samples[n] = sweep.samples[sweep.size() - 1 - n] * std::exp(-(n / fs) / rate);
    }

    const Signal reference = fft_convolve(sweep, inverse);
    long ref_peak_pos = 0;
    for (long n = 1; n < reference.size(); ++n) {
        if (std::fabs(reference.samples[n]) > std::fabs(reference.samples[ref_peak_pos])) {
            ref_peak_pos = n;
        }
    }
    const double ref_peak = reference.samples[ref_peak_pos];
    if (ref_peak == 0.0) throw InvalidInput("sweep: degenerate sweep (zero self-deconvolution)");

    const Signal raw = fft_convolve(recording, inverse);
    long peak_pos = 0;
    for (long n = 1; n < raw.size(); ++n) {
        if (std::fabs(raw.samples[n]) > std::fabs(raw.samples[peak_pos])) peak_pos = n;
    }

    DeconvolvedRir result;
    result.rir = Signal::zeros(rir_len, fs);
    for (long n = 0; n < rir_len && peak_pos + n < raw.size(); ++n) {
        result.rir.samples[n] = raw.samples[peak_pos + n] / ref_peak;
    }
    result.onset_delay = peak_pos - ref_peak_pos;
    result.peak = result.rir.samples[0];
    return result;
}

}  // namespace privaudio
