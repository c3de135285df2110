#include "privaudio/stoi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "privaudio/errors.hpp"
#include "privaudio/fft.hpp"
#include "privaudio/resample.hpp"

namespace privaudio {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Periodic-style Hann used by the reference: hanning(N+2) without endpoints.
std::array<double, StoiConfig::frame_len> analysis_window() {
    std::array<double, StoiConfig::frame_len> w;
    for (int j = 0; j < StoiConfig::frame_len; ++j) {
        w[j] = 0.5 - 0.5 * std::cos(2.0 * M_PI * (j + 1) / (StoiConfig::frame_len + 1));
    }
    return w;
}

struct BandMap {
    std::array<int, StoiConfig::bands> lo;  // inclusive FFT bin
    std::array<int, StoiConfig::bands> hi;  // exclusive FFT bin
};

// One-third-octave bands snapped to FFT bin frequencies: each edge moves to
// the nearest bin of the 512-point grid, and a band covers [lo, hi).
BandMap third_octave_bins() {
    const int half = StoiConfig::fft_len / 2 + 1;
    std::vector<double> freqs(half);
    for (int k = 0; k < half; ++k) {
        freqs[k] = k * StoiConfig::internal_rate_hz / StoiConfig::fft_len;
    }
    auto nearest_bin = [&](double f) {
        int best = 0;
        for (int k = 1; k < half; ++k) {
            if (std::fabs(freqs[k] - f) < std::fabs(freqs[best] - f)) best = k;
        }
        return best;
    };
    BandMap map;
    for (int j = 0; j < StoiConfig::bands; ++j) {
        map.lo[j] = nearest_bin(StoiConfig::min_center_hz * std::pow(2.0, (2.0 * j - 1.0) / 6.0));
        map.hi[j] = nearest_bin(StoiConfig::min_center_hz * std::pow(2.0, (2.0 * j + 1.0) / 6.0));
    }
    return map;
}

// Drops frames of both signals wherever the clean signal sits more than
// 40 dB below its loudest frame, then overlap-adds the survivors.
void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
    const auto w = analysis_window();
    const int len = StoiConfig::frame_len;
    const int hop = StoiConfig::hop;
    const long n = static_cast<long>(x.size());

    std::vector<long> starts;
    for (long i = 0; i + len <= n; i += hop) starts.push_back(i);
    if (starts.empty()) {
        x.clear();
        y.clear();
        return;
    }

    std::vector<double> energy(starts.size());
    double max_energy = -std::numeric_limits<double>::infinity();
    for (size_t f = 0; f < starts.size(); ++f) {
        double sum = 0.0;
        for (int j = 0; j < len; ++j) {
            const double v = w[j] * x[starts[f] + j];
            sum += v * v;
        }
        energy[f] = 20.0 * std::log10(std::sqrt(sum) + kEps);
        max_energy = std::max(max_energy, energy[f]);
    }

    std::vector<long> kept;
    for (size_t f = 0; f < starts.size(); ++f) {
        if (energy[f] > max_energy - StoiConfig::dyn_range_db) kept.push_back(starts[f]);
    }
    if (kept.empty()) {
        x.clear();
        y.clear();
        return;
    }

    const long out_len = static_cast<long>(kept.size() - 1) * hop + len;
    std::vector<double> xs(out_len, 0.0);
    std::vector<double> ys(out_len, 0.0);
    for (size_t f = 0; f < kept.size(); ++f) {
        const long out = static_cast<long>(f) * hop;
        for (int j = 0; j < len; ++j) {
            xs[out + j] += w[j] * x[kept[f] + j];
            ys[out + j] += w[j] * y[kept[f] + j];
        }
    }
    x = std::move(xs);
    y = std::move(ys);
}

// Band envelope matrix: bands[j][m] = sqrt(sum of |FFT bin|^2 over band j)
// for STFT frame m. The frame loop stops one hop short of the signal end,
// matching the reference's boundary convention.
std::vector<std::vector<double>> band_envelopes(const std::vector<double>& x) {
    const auto w = analysis_window();
    const auto map = third_octave_bins();
    const int len = StoiConfig::frame_len;
    const int hop = StoiConfig::hop;
    const long n = static_cast<long>(x.size());

    std::vector<std::vector<double>> bands(StoiConfig::bands);
    RealFft fft(StoiConfig::fft_len);
    std::vector<double> frame(StoiConfig::fft_len);
    std::vector<std::complex<double>> spec(StoiConfig::fft_len / 2 + 1);
    for (long i = 0; i + len < n; i += hop) {
        std::fill(frame.begin(), frame.end(), 0.0);
        for (int j = 0; j < len; ++j) frame[j] = w[j] * x[i + j];
        fft.forward(frame.data(), spec.data());
        for (int j = 0; j < StoiConfig::bands; ++j) {
            double sum = 0.0;
            for (int k = map.lo[j]; k < map.hi[j]; ++k) sum += std::norm(spec[k]);
            bands[j].push_back(std::sqrt(sum));
        }
    }
    return bands;
}

}  // namespace

double stoi(const Signal& clean, const Signal& degraded) {
    validate_signal(clean, "clean");
    validate_signal(degraded, "degraded");
    if (clean.size() != degraded.size()) {
        throw InvalidInput("stoi: clean and degraded lengths differ");
    }
    if (clean.sample_rate_hz != degraded.sample_rate_hz) {
        throw InvalidInput("stoi: clean and degraded sample rates differ");
    }
    if (power(clean) == 0.0) throw InvalidInput("stoi: clean signal is silent");

    Signal x = clean;
    Signal y = degraded;
    if (x.sample_rate_hz != StoiConfig::internal_rate_hz) {
        x = resample(x, StoiConfig::internal_rate_hz);
        y = resample(y, StoiConfig::internal_rate_hz);
    }

    std::vector<double> xs = std::move(x.samples);
    std::vector<double> ys = std::move(y.samples);
    remove_silent_frames(xs, ys);

    const auto bx = band_envelopes(xs);
    const auto by = band_envelopes(ys);
    const long frames = bx.empty() ? 0 : static_cast<long>(bx.front().size());
    const int seg = StoiConfig::segment_frames;
    if (frames < seg) {
        throw InvalidInput("stoi: too few analysis frames after silence removal");
    }

    const double clip = 1.0 + std::pow(10.0, -StoiConfig::clip_sdr_db / 20.0);
    double total = 0.0;
    const long segments = frames - seg + 1;
    std::array<double, StoiConfig::segment_frames> xv, yv;
    for (long m = 0; m < segments; ++m) {
        for (int j = 0; j < StoiConfig::bands; ++j) {
            double nx = 0.0, ny = 0.0;
            for (int t = 0; t < seg; ++t) {
                xv[t] = bx[j][m + t];
                yv[t] = by[j][m + t];
                nx += xv[t] * xv[t];
                ny += yv[t] * yv[t];
            }
            const double alpha = std::sqrt(nx) / (std::sqrt(ny) + kEps);

            double mean_x = 0.0, mean_y = 0.0;
            for (int t = 0; t < seg; ++t) {
                yv[t] = std::min(alpha * yv[t], clip * xv[t]);
                mean_x += xv[t];
                mean_y += yv[t];
            }
            mean_x /= seg;
            mean_y /= seg;

            double xx = 0.0, yy = 0.0;
            for (int t = 0; t < seg; ++t) {
                xv[t] -= mean_x;
                yv[t] -= mean_y;
                xx += xv[t] * xv[t];
                yy += yv[t] * yv[t];
            }
            const double denom = (std::sqrt(xx) + kEps) * (std::sqrt(yy) + kEps);
            double corr = 0.0;
            for (int t = 0; t < seg; ++t) corr += xv[t] * yv[t];
            total += corr / denom;
        }
    }
    return total / (static_cast<double>(segments) * StoiConfig::bands);
}

}  // namespace privaudio
