#include <cmath>
#include <limits>

#include "doctest.h"
#include "privaudio/errors.hpp"
#include "privaudio/metrics.hpp"
#include "privaudio/philox.hpp"

using namespace privaudio;

namespace {

Signal random_signal(long len, std::uint64_t seed) {
    Signal s = Signal::zeros(len, 16000.0);
    Philox(seed).fill_normal(s.samples.data(), len);
    return s;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("identical signals score zero error and infinite snr") {
    const Signal ref = random_signal(300, 1);
    CHECK(relative_error(ref, ref) == 0.0);
    CHECK(relative_error_optscale(ref, ref) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isinf(snr_db(ref, ref)));
    CHECK(snr_db(ref, ref) > 0.0);
    CHECK(align_lag(ref, ref) == 0);
}

TEST_CASE("a pure gain is an error for the raw metric but not the optimal-scale one") {
    const Signal ref = random_signal(300, 2);
    Signal twice = ref;
    for (double& v : twice.samples) v *= 2.0;
    CHECK(relative_error(ref, twice) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(relative_error_optscale(ref, twice) == doctest::Approx(0.0).epsilon(1e-9));

    Signal neg = ref;
    for (double& v : neg.samples) v = -v;
    CHECK(relative_error(ref, neg) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(relative_error_optscale(ref, neg) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("snr is minus twenty log of the relative error") {
    const Signal ref = random_signal(400, 3);
    Signal test = ref;
    const Signal noise = random_signal(400, 4);
    for (long t = 0; t < 400; ++t) test.samples[t] += 0.1 * noise.samples[t];

    const double rel = relative_error(ref, test);
    CHECK(snr_db(ref, test) == doctest::Approx(-20.0 * std::log10(rel)).epsilon(1e-10));

    Signal ten_pct = ref;
    for (double& v : ten_pct.samples) v *= 1.1;
    CHECK(snr_db(ref, ten_pct) == doctest::Approx(20.0).epsilon(1e-10));

    Signal zero_db = ref;
    for (double& v : zero_db.samples) v *= 2.0;  // error power == signal power
    CHECK(snr_db(ref, zero_db) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("an all-zero test signal scores unit optimal-scale error") {
    const Signal ref = random_signal(64, 5);
    const Signal zero = Signal::zeros(64, 16000.0);
    CHECK(relative_error_optscale(ref, zero) == 1.0);
    CHECK(relative_error(ref, zero) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("alignment lag reports how far the test signal trails") {
    const Signal ref = random_signal(500, 6);
    for (long d : {1L, 7L, 40L}) {
        Signal delayed = Signal::zeros(500, 16000.0);
        for (long t = d; t < 500; ++t) delayed.samples[t] = ref.samples[t - d];
        CHECK(align_lag(ref, delayed) == d);

        Signal advanced = Signal::zeros(500, 16000.0);
        for (long t = 0; t + d < 500; ++t) advanced.samples[t] = ref.samples[t + d];
        CHECK(align_lag(ref, advanced) == -d);
    }
}

TEST_CASE("degenerate metric inputs are rejected") {
    const Signal ref = random_signal(64, 7);
    const Signal zero = Signal::zeros(64, 16000.0);
    CHECK_THROWS_AS(relative_error(ref, random_signal(65, 8)), InvalidInput);
    CHECK_THROWS_AS(relative_error(zero, ref), InvalidInput);
    CHECK_THROWS_AS(snr_db(zero, ref), InvalidInput);
    Signal wrong_rate = ref;
    wrong_rate.sample_rate_hz = 8000.0;
    CHECK_THROWS_AS(relative_error(ref, wrong_rate), InvalidInput);
}

}  // TEST_SUITE
