#include "privaudio/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "privaudio/errors.hpp"

namespace privaudio {
namespace {

void check_pair(const Signal& reference, const Signal& test) {
    validate_signal(reference, "reference");
    validate_signal(test, "test");
    if (reference.size() != test.size()) {
        throw InvalidInput("metrics: reference and test lengths differ");
    }
    if (reference.sample_rate_hz != test.sample_rate_hz) {
        throw InvalidInput("metrics: reference and test sample rates differ");
    }
}

double norm_of(const Signal& s) { return norm2(s.samples); }

}  // namespace

double relative_error(const Signal& reference, const Signal& test) {
    check_pair(reference, test);
    const double ref_norm = norm_of(reference);
    if (ref_norm == 0.0) throw InvalidInput("metrics: reference signal is all zero");
    double sum = 0.0;
    for (long t = 0; t < reference.size(); ++t) {
        const double d = test.samples[t] - reference.samples[t];
        sum += d * d;
    }
    return std::sqrt(sum) / ref_norm;
}

double relative_error_optscale(const Signal& reference, const Signal& test) {
    check_pair(reference, test);
    const double ref_norm = norm_of(reference);
    if (ref_norm == 0.0) throw InvalidInput("metrics: reference signal is all zero");
    const double test_sq = dot(test.samples, test.samples);
    if (test_sq == 0.0) return 1.0;
    const double alpha = dot(reference.samples, test.samples) / test_sq;
    double sum = 0.0;
    for (long t = 0; t < reference.size(); ++t) {
        const double d = alpha * test.samples[t] - reference.samples[t];
        sum += d * d;
    }
    return std::sqrt(sum) / ref_norm;
}

double snr_db(const Signal& reference, const Signal& test) {
    check_pair(reference, test);
    const double ref_norm = norm_of(reference);
    if (ref_norm == 0.0) throw InvalidInput("metrics: reference signal is all zero");
    double err = 0.0;
    for (long t = 0; t < reference.size(); ++t) {
        const double d = test.samples[t] - reference.samples[t];
        err += d * d;
    }
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(ref_norm * ref_norm / err);
}

long align_lag(const Signal& reference, const Signal& test) {
    check_pair(reference, test);
    std::vector<double> reversed(test.samples.rbegin(), test.samples.rend());
    const std::vector<double> corr = fft_convolve(reference.samples, reversed);
    // corr[k] = sum_t ref[t] * test[t + (len-1) - k]; peak index maps to lag.
    long best = 0;
    for (long k = 1; k < static_cast<long>(corr.size()); ++k) {
        if (std::fabs(corr[k]) > std::fabs(corr[best])) best = k;
    }
    return (test.size() - 1) - best;
}

}  // namespace privaudio
