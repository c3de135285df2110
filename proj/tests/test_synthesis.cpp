#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "privaudio/errors.hpp"
#include "privaudio/metrics.hpp"
#include "privaudio/philox.hpp"
#include "privaudio/room.hpp"
#include "privaudio/synthesis.hpp"

using namespace privaudio;

namespace {

Signal random_signal(long len, std::uint64_t seed, double rate = 16000.0) {
    Signal s = Signal::zeros(len, rate);
    Philox(seed).fill_normal(s.samples.data(), len);
    return s;
}

ChannelSet random_channels(int speakers, int listeners, long message_len, long rir_len,
                           std::uint64_t seed) {
    std::vector<std::vector<Signal>> rirs(listeners);
    for (int k = 0; k < listeners; ++k) {
        for (int i = 0; i < speakers; ++i) {
            rirs[k].push_back(random_signal(rir_len, seed++));
        }
    }
    return ChannelSet::make(std::move(rirs), message_len);
}

// 6 speakers and 2 listeners in the reverberant rectangle; RIRs simulated.
ChannelSet room_channels(long message_len, long rir_len) {
    auto scene = RoomScene::make(7.0, 8.0, 0.35, 16000.0, rir_len);
    const Point speakers[6] = {{1.0, 1.2}, {6.1, 1.0}, {0.8, 6.9}, {6.2, 7.1}, {3.4, 0.7}, {3.6, 7.3}};
    const Point listeners[2] = {{2.5, 3.5}, {4.6, 4.8}};
    std::vector<std::vector<Signal>> rirs(2);
    for (int k = 0; k < 2; ++k) {
        for (const Point& s : speakers) rirs[k].push_back(simulate_rir(scene, s, listeners[k]));
    }
    return ChannelSet::make(std::move(rirs), message_len);
}

MessageSet random_messages(int listeners, long len, std::uint64_t seed) {
    std::vector<Signal> msgs;
    for (int k = 0; k < listeners; ++k) msgs.push_back(random_signal(len, seed + k));
    return MessageSet::make(std::move(msgs));
}

// Reconstruction error inside the delivery windows: renders are compared to
// the delayed messages only where the design promises delivery.
double windowed_rel_err(const ChannelSet& set, const std::vector<Signal>& drive,
                        const MessageSet& msgs, const std::vector<long>& latencies,
                        const std::vector<long>& window_lens) {
    const MessageSet delayed = delayed_messages(msgs, latencies);
    double err = 0.0, ref = 0.0;
    for (int k = 0; k < set.dims.listeners; ++k) {
        const Signal got = render_at(drive, set.rirs[k], set.dims.message_len);
        for (long t = latencies[k]; t < latencies[k] + window_lens[k]; ++t) {
            const double d = got.samples[t] - delayed.messages[k].samples[t];
            err += d * d;
            ref += delayed.messages[k].samples[t] * delayed.messages[k].samples[t];
        }
    }
    return std::sqrt(err) / std::sqrt(ref);
}

}  // namespace

TEST_SUITE("synthesis") {

TEST_CASE("filter design reconstructs messages through the reverberant room") {
    const ChannelSet set = room_channels(4000, 300);
    const MessageSet msgs = random_messages(2, 4000, 50);
    const long noise_len = (set.dims.drive_len + 1) / 2;

    const MccsDesign design = design_mccs(set, msgs, noise_len, 1.0, 99, {1e-6, 2000});
    CHECK(design.report.converged);
    // Delivery lags by the propagation delay of each listener's nearest
    // speaker (plus the window guard); the delayed message restricted to the
    // delivery window is the physically reachable target.
    for (int k = 0; k < 2; ++k) {
        CHECK(design.latencies[k] > 40);
        CHECK(design.latencies[k] < 340);
        CHECK(design.window_lens[k] > 0);
        CHECK(design.latencies[k] + design.window_lens[k] <= 4000);
    }
    CHECK(windowed_rel_err(set, design.drive, msgs, design.latencies, design.window_lens) <=
          1e-3);

    // The drive really is the noise convolved with the filters.
    for (int i = 0; i < set.dims.speakers; ++i) {
        const Signal recomputed = fft_convolve(design.bank.noises[i], design.filters[i]);
        REQUIRE(recomputed.size() == design.drive[i].size());
        double err = 0.0, ref = 0.0;
        for (long t = 0; t < recomputed.size(); ++t) {
            const double d = recomputed.samples[t] - design.drive[i].samples[t];
            err += d * d;
            ref += recomputed.samples[t] * recomputed.samples[t];
        }
        CHECK(err <= 1e-20 * ref);
    }
}

TEST_CASE("rescaling the noise std leaves the drive unchanged") {
    const ChannelSet set = random_channels(4, 1, 1200, 100, 400);
    const MessageSet msgs = random_messages(1, 1200, 60);
    const long noise_len = (set.dims.drive_len + 1) / 2;

    const MccsDesign base = design_mccs(set, msgs, noise_len, 1.0, 7, {1e-8, 1500});
    const MccsDesign scaled = design_mccs(set, msgs, noise_len, 10.0, 7, {1e-8, 1500});

    double drive_diff = 0.0, drive_ref = 0.0, filter_ratio_err = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (long t = 0; t < set.dims.drive_len; ++t) {
            const double d = base.drive[i].samples[t] - scaled.drive[i].samples[t];
            drive_diff += d * d;
            drive_ref += base.drive[i].samples[t] * base.drive[i].samples[t];
        }
        for (long t = 0; t < set.dims.filter_len; ++t) {
            const double d = base.filters[i].samples[t] - 10.0 * scaled.filters[i].samples[t];
            filter_ratio_err += d * d;
        }
    }
    CHECK(std::sqrt(drive_diff) <= 1e-8 * std::sqrt(drive_ref));
    CHECK(filter_ratio_err <= 1e-16 * drive_ref);
}

TEST_CASE("infeasible filter design is rejected with the sample-count margin") {
    const ChannelSet set = random_channels(2, 2, 2000, 150, 500);
    const long noise_len = (set.dims.drive_len + 1) / 2;  // 926 -> filter_len 926
    try {
        design_mccs(set, random_messages(2, 2000, 70), noise_len, 1.0, 1);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(e.margin() == 2 * 926 - 2 * 2000);
    }
}

TEST_CASE("zero messages produce a zero filter design") {
    const ChannelSet set = random_channels(3, 1, 600, 50, 550);
    std::vector<Signal> zero_msgs = {Signal::zeros(600, 16000.0)};
    const MccsDesign design = design_mccs(set, MessageSet::make(zero_msgs),
                                          (set.dims.drive_len + 1) / 2, 1.0, 3);
    CHECK(design.report.converged);
    for (const Signal& x : design.drive) {
        for (double v : x.samples) CHECK(v == 0.0);
    }
}

TEST_CASE("zero noise std reduces the nullspace design to the pure carrier") {
    const ChannelSet set = random_channels(3, 1, 600, 50, 600);
    const MessageSet msgs = random_messages(1, 600, 80);
    const NullspaceDesign design = design_nullspace(set, msgs, 0.0, 5);
    CHECK(design.carrier_report.converged);
    for (int i = 0; i < 3; ++i) {
        for (long t = 0; t < set.dims.drive_len; ++t) {
            CHECK(design.jam[i].samples[t] == 0.0);
            CHECK(design.drive[i].samples[t] == design.carrier[i].samples[t]);
        }
    }
}

TEST_CASE("the jam is invisible at designed listeners") {
    const ChannelSet set = random_channels(6, 2, 2000, 150, 650);
    const MessageSet msgs = random_messages(2, 2000, 90);
    const NullspaceDesign design = design_nullspace(set, msgs, 2.0, 11, {1e-8, 2000});
    CHECK(design.carrier_report.converged);
    CHECK(design.projection_report.converged);

    for (int k = 0; k < 2; ++k) {
        const Signal with_jam = render_at(design.drive, set.rirs[k], 2000);
        const Signal carrier_only = render_at(design.carrier, set.rirs[k], 2000);
        double diff = 0.0, ref = 0.0;
        for (long t = design.latencies[k]; t < design.latencies[k] + design.window_lens[k]; ++t) {
            const double d = with_jam.samples[t] - carrier_only.samples[t];
            diff += d * d;
            ref += carrier_only.samples[t] * carrier_only.samples[t];
        }
        CHECK(std::sqrt(diff) <= 1e-5 * std::sqrt(ref));
    }
    CHECK(windowed_rel_err(set, design.drive, msgs, design.latencies, design.window_lens) <=
          1e-4);
}

TEST_CASE("nullspace design matches the dense carrier-plus-projector oracle") {
    const ChannelSet set = random_channels(3, 1, 96, 16, 700);
    const MessageSet msgs = random_messages(1, 96, 95);
    const double std_dev = 1.7;
    const std::uint64_t seed = 13;
    const NullspaceDesign design =
        design_nullspace(set, msgs, std_dev, seed, {1e-10, 500}, {1e-10, 500});

    // Dense oracle on the same delivery-windowed system the design solves:
    // rows outside the windows are zero, s = pinv(Hm) y, and
    // w = std * (I - pinv(Hm) Hm) v_unit.
    const ProblemDims& d = set.dims;
    const RowWindows windows = delivery_windows(set);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d.stacked_message_len(), d.stacked_drive_len());
    for (int k = 0; k < d.listeners; ++k) {
        const auto [w_start, w_end] = windows[k];
        for (int i = 0; i < d.speakers; ++i) {
            for (long t = w_start; t < w_end; ++t) {
                for (long tau = 0; tau < d.drive_len; ++tau) {
                    const long lag = t - tau;
                    if (lag >= 0 && lag < d.rir_len) {
                        H(k * d.message_len + t, i * d.drive_len + tau) =
                            set.rirs[k][i].samples[lag];
                    }
                }
            }
        }
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(H);
    const Eigen::MatrixXd pinv = cod.pseudoInverse();

    Eigen::VectorXd y(d.stacked_message_len());
    const auto stacked =
        windowed_messages(delayed_messages(msgs, design.latencies), windows).stacked();
    for (long t = 0; t < y.size(); ++t) y(t) = stacked[t];

    Eigen::VectorXd v(d.stacked_drive_len());
    for (int i = 0; i < d.speakers; ++i) {
        std::vector<double> block(d.drive_len);
        Philox(seed, i).fill_normal(block.data(), block.size());
        for (long t = 0; t < d.drive_len; ++t) v(i * d.drive_len + t) = block[t];
    }

    const Eigen::VectorXd s_dense = pinv * y;
    const Eigen::VectorXd x_dense = s_dense + std_dev * (v - pinv * (H * v));

    double err = 0.0;
    for (int i = 0; i < d.speakers; ++i) {
        for (long t = 0; t < d.drive_len; ++t) {
            const double diff = design.drive[i].samples[t] - x_dense(i * d.drive_len + t);
            err += diff * diff;
        }
    }
    CHECK(std::sqrt(err) <= 1e-6 * x_dense.norm());
}

TEST_CASE("off-spot jam energy is linear in the noise std") {
    const ChannelSet set = random_channels(4, 1, 800, 60, 800);
    const MessageSet msgs = random_messages(1, 800, 101);
    const std::vector<Signal> off_rirs = {random_signal(60, 901), random_signal(60, 902),
                                          random_signal(60, 903), random_signal(60, 904)};

    const NullspaceDesign d1 = design_nullspace(set, msgs, 0.5, 17);
    const NullspaceDesign d2 = design_nullspace(set, msgs, 1.0, 17);
    const NullspaceDesign d3 = design_nullspace(set, msgs, 2.0, 17);

    auto jam_rms = [&](const NullspaceDesign& d) {
        const Signal with_jam = render_at(d.drive, off_rirs);
        const Signal carrier = render_at(d.carrier, off_rirs);
        double sum = 0.0;
        for (long t = 0; t < with_jam.size(); ++t) {
            const double diff = with_jam.samples[t] - carrier.samples[t];
            sum += diff * diff;
        }
        return std::sqrt(sum / with_jam.size());
    };
    const double r1 = jam_rms(d1), r2 = jam_rms(d2), r3 = jam_rms(d3);
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r3 / r2 == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("the jam is recomputable from the stored pieces") {
    const ChannelSet set = random_channels(3, 1, 600, 50, 850);
    const MessageSet msgs = random_messages(1, 600, 107);
    const double std_dev = 3.0;
    const NullspaceDesign design = design_nullspace(set, msgs, std_dev, 23);

    const MimoConvOperator h = MimoConvOperator::channel(set, delivery_windows(set));
    std::vector<double> v(set.dims.stacked_drive_len());
    for (int i = 0; i < set.dims.speakers; ++i) {
        Philox(23, i).fill_normal(v.data() + i * set.dims.drive_len, set.dims.drive_len);
    }
    const auto htz = h.adjoint(design.coeffs);
    double err = 0.0, ref = 0.0;
    for (int i = 0; i < set.dims.speakers; ++i) {
        for (long t = 0; t < set.dims.drive_len; ++t) {
            const long j = i * set.dims.drive_len + t;
            const double recomputed = std_dev * v[j] - htz[j];
            const double stored = design.jam[i].samples[t];
            err += (recomputed - stored) * (recomputed - stored);
            ref += stored * stored;
        }
    }
    CHECK(std::sqrt(err) <= 1e-10 * std::sqrt(ref));
}

TEST_CASE("power normalization applies one global scalar") {
    std::vector<Signal> drive = {random_signal(500, 111), random_signal(500, 112)};
    const auto [scaled, factor] = normalize_power(drive, 0.25);

    double sum = 0.0;
    for (const Signal& x : scaled) {
        for (double v : x.samples) sum += v * v;
    }
    CHECK(sum / 1000.0 == doctest::Approx(0.25).epsilon(1e-12));
    for (int i = 0; i < 2; ++i) {
        for (long t = 0; t < 500; ++t) {
            CHECK(scaled[i].samples[t] == factor * drive[i].samples[t]);
        }
    }

    const auto [rescaled, factor2] = normalize_power(scaled, 0.5);
    CHECK(factor2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    const auto [same, factor3] = normalize_power(scaled, 0.25);
    CHECK(factor3 == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(normalize_power({Signal::zeros(10, 16000.0)}, 1.0), InvalidInput);
    CHECK_THROWS_AS(normalize_power(drive, 0.0), InvalidInput);
}

TEST_CASE("rendering distributes over sums and matches the stacked operator") {
    const ChannelSet set = random_channels(3, 2, 600, 50, 950);
    std::vector<Signal> a, b, sum;
    for (int i = 0; i < 3; ++i) {
        a.push_back(random_signal(set.dims.drive_len, 960 + i));
        b.push_back(random_signal(set.dims.drive_len, 970 + i));
        Signal s = a.back();
        for (long t = 0; t < s.size(); ++t) s.samples[t] += b.back().samples[t];
        sum.push_back(std::move(s));
    }

    const Signal ra = render_at(a, set.rirs[0], 600);
    const Signal rb = render_at(b, set.rirs[0], 600);
    const Signal rsum = render_at(sum, set.rirs[0], 600);
    double err = 0.0, ref = 0.0;
    for (long t = 0; t < 600; ++t) {
        const double d = rsum.samples[t] - (ra.samples[t] + rb.samples[t]);
        err += d * d;
        ref += rsum.samples[t] * rsum.samples[t];
    }
    CHECK(std::sqrt(err) <= 1e-10 * std::sqrt(ref));

    // One listener block of the stacked operator equals render_at.
    const MimoConvOperator h = MimoConvOperator::channel(set);
    std::vector<double> stacked;
    for (const Signal& x : a) {
        stacked.insert(stacked.end(), x.samples.begin(), x.samples.end());
    }
    const auto y = h.apply(stacked);
    err = ref = 0.0;
    for (long t = 0; t < 600; ++t) {
        const double d = ra.samples[t] - y[t];
        err += d * d;
        ref += ra.samples[t] * ra.samples[t];
    }
    CHECK(std::sqrt(err) <= 1e-12 * std::sqrt(ref));
}

TEST_CASE("delta channels render as the sum of drives") {
    Signal delta = Signal::zeros(1, 16000.0);
    delta.samples[0] = 1.0;
    std::vector<Signal> drive = {random_signal(100, 980), random_signal(100, 981)};
    const Signal out = render_at(drive, {delta, delta});
    for (long t = 0; t < 100; ++t) {
        CHECK(out.samples[t] ==
              doctest::Approx(drive[0].samples[t] + drive[1].samples[t]).epsilon(1e-12));
    }
}

TEST_CASE("dropout zeroes exactly the removed speakers") {
    std::vector<Signal> drive = {random_signal(50, 990), random_signal(50, 991),
                                 random_signal(50, 992)};
    const auto all = apply_dropout(drive, {0, 1, 2});
    for (int i = 0; i < 3; ++i) {
        for (long t = 0; t < 50; ++t) CHECK(all[i].samples[t] == drive[i].samples[t]);
    }

    const auto only1 = apply_dropout(drive, {1});
    for (long t = 0; t < 50; ++t) {
        CHECK(only1[0].samples[t] == 0.0);
        CHECK(only1[1].samples[t] == drive[1].samples[t]);
        CHECK(only1[2].samples[t] == 0.0);
    }
    CHECK_THROWS_AS(apply_dropout(drive, {}), InvalidInput);
    CHECK_THROWS_AS(apply_dropout(drive, {3}), InvalidInput);
}

TEST_CASE("channel perturbation hits the requested per-path SNR exactly") {
    const ChannelSet set = random_channels(2, 2, 600, 50, 1500);
    const ChannelSet noisy = perturb_channels(set, 20.0, 31);
    for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 2; ++i) {
            double sig = 0.0, err = 0.0;
            for (long t = 0; t < 50; ++t) {
                const double clean = set.rirs[k][i].samples[t];
                const double diff = noisy.rirs[k][i].samples[t] - clean;
                sig += clean * clean;
                err += diff * diff;
            }
            CHECK(10.0 * std::log10(sig / err) == doctest::Approx(20.0).epsilon(1e-9));
        }
    }

    const ChannelSet same = perturb_channels(set, std::numeric_limits<double>::infinity(), 31);
    for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 2; ++i) {
            for (long t = 0; t < 50; ++t) {
                CHECK(same.rirs[k][i].samples[t] == set.rirs[k][i].samples[t]);
            }
        }
    }
}

TEST_CASE("designing on wrong channels always hurts reconstruction") {
    const ChannelSet truth = random_channels(3, 1, 400, 40, 1600);
    const MessageSet msgs = random_messages(1, 400, 120);
    const NullspaceDesign clean = design_nullspace(truth, msgs, 0.0, 1);
    const double baseline =
        windowed_rel_err(truth, clean.drive, msgs, clean.latencies, clean.window_lens);

    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const ChannelSet wrong = perturb_channels(truth, 20.0, 2000 + trial);
        const NullspaceDesign perturbed = design_nullspace(wrong, msgs, 0.0, 1);
        CHECK(windowed_rel_err(truth, perturbed.drive, msgs, perturbed.latencies,
                               perturbed.window_lens) > baseline);
    }
}

}  // TEST_SUITE
