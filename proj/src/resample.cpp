#include "privaudio/resample.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>

#include "privaudio/errors.hpp"

namespace privaudio {
namespace {

constexpr int kTapsPerPhase = 64;  // kernel half-width 32 input samples
constexpr double kKaiserBeta = 7.857;  // ~80 dB sidelobe rejection
constexpr double kCutoffScale = 0.97;  // transition band kept inside Nyquist

double sinc(double x) {
    if (x == 0.0) {
        return 1.0;
    }
    const double px = M_PI * x;
    return std::sin(px) / px;
}

// Continued-fraction rational approximation of a positive ratio.
void approximate_ratio(double ratio, long& p, long& q) {
    long best_p = 1;
    long best_q = 1;
    double x = ratio;
    long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    for (int i = 0; i < 32; ++i) {
        const double a = std::floor(x);
        const long ai = static_cast<long>(a);
        const long h2 = ai * h1 + h0;
        const long k2 = ai * k1 + k0;
        if (h2 > 1'000'000 || k2 > 1'000'000) {
            break;
        }
        // The first convergent of a ratio below one is 0/1; keep recursing
        // past it instead of accepting a degenerate numerator.
        if (h2 > 0 && k2 > 0) {
            best_p = h2;
            best_q = k2;
            if (std::abs(static_cast<double>(h2) / k2 - ratio) < 1e-12 * ratio) {
                break;
            }
        }
        const double frac = x - a;
        if (frac < 1e-15) {
            break;
        }
        x = 1.0 / frac;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    p = best_p;
    q = best_q;
    const long g = std::gcd(p, q);
    p /= g;
    q /= g;
}

}  // namespace

double bessel_i0(double x) {
    // Power series; converges quickly for the |x| <= beta range used here.
    const double half = x / 2.0;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half / k) * (half / k);
        sum += term;
        if (term < 1e-18 * sum) {
            break;
        }
    }
    return sum;
}

std::vector<double> kaiser_window(std::size_t length, double beta) {
    std::vector<double> w(length);
    if (length == 1) {
        w[0] = 1.0;
        return w;
    }
    const double denom = bessel_i0(beta);
    const double mid = static_cast<double>(length - 1) / 2.0;
    for (std::size_t n = 0; n < length; ++n) {
        const double t = (static_cast<double>(n) - mid) / mid;  // in [-1, 1]
        w[n] = bessel_i0(beta * std::sqrt(1.0 - t * t)) / denom;
    }
    return w;
}

Signal resample(const Signal& in, double target_hz) {
    if (!(target_hz > 0.0)) {
        throw InvalidInput("resample: target rate must be positive");
    }
    validate_signal(in, "resample input");
    if (in.sample_rate_hz == target_hz) {
        return in;
    }

    long up = 0;
    long down = 0;
    approximate_ratio(target_hz / in.sample_rate_hz, up, down);
    const double ratio = static_cast<double>(up) / static_cast<double>(down);

    const long in_len = static_cast<long>(in.size());
    const long out_len = std::lround(static_cast<double>(in_len) * target_hz / in.sample_rate_hz);

    // Interpolation kernel in input-sample units, cut off below the narrower
    // Nyquist. Kaiser window spans the 64-tap support.
    const int half = kTapsPerPhase / 2;
    const double cutoff = kCutoffScale * std::min(1.0, ratio);
    auto kernel_at = [&](double u) {
        const double t = u / half;  // window argument in [-1, 1]
        if (t <= -1.0 || t >= 1.0) {
            return 0.0;
        }
        const double win = bessel_i0(kKaiserBeta * std::sqrt(1.0 - t * t)) / bessel_i0(kKaiserBeta);
        return cutoff * sinc(cutoff * u) * win;
    };

    // Polyphase tables: output m sits at input position m*down/up; the
    // fractional part cycles with period `up`.
    std::vector<std::vector<double>> phases;
    const bool tabulate = up <= 4096;
    if (tabulate) {
        phases.resize(static_cast<std::size_t>(up));
        for (long ph = 0; ph < up; ++ph) {
            const double frac =
                static_cast<double>(ph * down % up) / static_cast<double>(up);
            auto& taps = phases[static_cast<std::size_t>(ph)];
            taps.resize(kTapsPerPhase);
            for (int j = 0; j < kTapsPerPhase; ++j) {
                taps[static_cast<std::size_t>(j)] = kernel_at(j - half + 1 - frac);
            }
        }
    }

    std::vector<double> out(static_cast<std::size_t>(out_len), 0.0);
    for (long m = 0; m < out_len; ++m) {
        const long num = m * down;
        const long base = num / up;          // floor for non-negative m
        const double frac = static_cast<double>(num % up) / static_cast<double>(up);
        double acc = 0.0;
        if (tabulate) {
            const auto& taps = phases[static_cast<std::size_t>(m % up)];
            for (int j = 0; j < kTapsPerPhase; ++j) {
                const long idx = base + j - half + 1;
                if (idx >= 0 && idx < in_len) {
                    acc += in.samples[static_cast<std::size_t>(idx)] * taps[static_cast<std::size_t>(j)];
                }
            }
        } else {
            for (int j = 0; j < kTapsPerPhase; ++j) {
                const long idx = base + j - half + 1;
                if (idx >= 0 && idx < in_len) {
                    acc += in.samples[static_cast<std::size_t>(idx)] * kernel_at(j - half + 1 - frac);
                }
            }
        }
        out[static_cast<std::size_t>(m)] = acc;
    }
    return Signal(std::move(out), target_hz);
}

}  // namespace privaudio
