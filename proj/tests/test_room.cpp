#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "privaudio/errors.hpp"
#include "privaudio/room.hpp"

using namespace privaudio;

namespace {

// Brute-force mirroring oracle: repeatedly reflect every known image across
// all four walls, keeping the minimal reflection count per position.
std::map<std::pair<long, long>, int> mirror_lattice(const RoomScene& scene, const Point& src,
                                                    int order) {
    auto key = [](double x, double y) {
        return std::make_pair(std::lround(x * 1e6), std::lround(y * 1e6));
    };
    std::map<std::pair<long, long>, int> seen;
    std::vector<Point> frontier = {src};
    seen[key(src.x, src.y)] = 0;
    for (int depth = 1; depth <= order; ++depth) {
        std::vector<Point> next;
        for (const Point& p : frontier) {
            const Point mirrors[4] = {{-p.x, p.y},
                                      {2 * scene.width - p.x, p.y},
                                      {p.x, -p.y},
                                      {p.x, 2 * scene.height - p.y}};
            for (const Point& m : mirrors) {
                const auto k = key(m.x, m.y);
                if (seen.find(k) == seen.end()) {
                    seen[k] = depth;
                    next.push_back(m);
                }
            }
        }
        frontier = std::move(next);
    }
    return seen;
}

double total_energy(const Signal& s) {
    double e = 0.0;
    for (double v : s.samples) e += v * v;
    return e;
}

}  // namespace

TEST_SUITE("room") {

TEST_CASE("order 0 yields only the source; order 1 adds one mirror per wall") {
    const auto scene = RoomScene::make(4.0, 3.0, 0.5);
    const Point src{1.0, 1.0};

    const auto zero = image_sources(scene, src, 0);
    REQUIRE(zero.size() == 1);
    CHECK(zero[0].position.x == src.x);
    CHECK(zero[0].position.y == src.y);
    CHECK(zero[0].reflections == 0);

    const auto one = image_sources(scene, src, 1);
    int first_order = 0;
    for (const auto& img : one) {
        if (img.reflections == 1) ++first_order;
    }
    CHECK(one.size() == 5);
    CHECK(first_order == 4);
}

TEST_CASE("order-2 images match the brute-force mirroring oracle") {
    const auto scene = RoomScene::make(4.0, 3.0, 0.5);
    const Point src{1.0, 1.0};
    const auto oracle = mirror_lattice(scene, src, 2);
    const auto images = image_sources(scene, src, 2);

    CHECK(images.size() == oracle.size());
    std::set<std::pair<long, long>> unique;
    for (const auto& img : images) {
        const auto k = std::make_pair(std::lround(img.position.x * 1e6),
                                      std::lround(img.position.y * 1e6));
        CHECK(unique.insert(k).second);  // no duplicates
        auto it = oracle.find(k);
        REQUIRE(it != oracle.end());
        CHECK(it->second == img.reflections);
    }
}

TEST_CASE("anechoic RIR is a single pulse with 1/distance amplitude") {
    auto scene = RoomScene::make(7.0, 8.0, 1.0, 16000.0, 400);
    const Point src{1.0, 1.0};
    const Point rcv{4.43, 1.0};  // 3.43 m: exactly 160 samples at c = 343

    const Signal rir = simulate_rir(scene, src, rcv);
    long peak = 0;
    for (long t = 1; t < rir.size(); ++t) {
        if (std::fabs(rir.samples[t]) > std::fabs(rir.samples[peak])) peak = t;
    }
    CHECK(peak == 160);
    CHECK(rir.samples[160] == doctest::Approx(1.0 / 3.43).epsilon(2e-3));

    // All energy lives inside the fractional-delay kernel support.
    double inside = 0.0, total = 0.0;
    for (long t = 0; t < rir.size(); ++t) {
        total += rir.samples[t] * rir.samples[t];
        if (t >= 120 && t <= 200) inside += rir.samples[t] * rir.samples[t];
    }
    CHECK(inside >= (1.0 - 1e-9) * total);
}

TEST_CASE("anechoic peak amplitudes follow the 1/distance law") {
    auto scene = RoomScene::make(9.0, 8.0, 1.0, 16000.0, 2000);
    const Point src{1.0, 4.0};
    // Whole-sample distances (100 and 200 samples of travel) so the pulse
    // kernel peaks at exactly the path amplitude for both receivers.
    const Signal near = simulate_rir(scene, src, Point{1.0 + 100 * 343.0 / 16000.0, 4.0});
    const Signal far = simulate_rir(scene, src, Point{1.0 + 200 * 343.0 / 16000.0, 4.0});
    auto peak = [](const Signal& s) {
        double p = 0.0;
        for (double v : s.samples) p = std::max(p, std::fabs(v));
        return p;
    };
    CHECK(peak(near) / peak(far) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("total energy matches an independent direct-sum-over-images oracle") {
    auto scene = RoomScene::make(7.0, 8.0, 0.35, 16000.0, 2000);
    scene.max_order = 6;
    const Point src{2.0, 3.0};
    const Point rcv{5.0, 6.2};
    const Signal rir = simulate_rir(scene, src, rcv);

    // Oracle: naive accumulation over the brute-force lattice, pow() for the
    // attenuation, unsorted order.
    const auto lattice = mirror_lattice(scene, src, 6);
    std::vector<double> oracle(scene.rir_len, 0.0);
    for (const auto& [key, count] : lattice) {
        const double ix = key.first * 1e-6;
        const double iy = key.second * 1e-6;
        const double dist = std::hypot(ix - rcv.x, iy - rcv.y);
        const double delay = dist * scene.sample_rate_hz / scene.speed_of_sound;
        const double amp = std::pow(1.0 - 0.35, count) / dist;
        const long base = static_cast<long>(std::floor(delay));
        const double frac = delay - base;
        for (int k = 0; k <= 80; ++k) {
            const long idx = base - 40 + k;
            if (idx < 0 || idx >= scene.rir_len) continue;
            const double window = 0.5 - 0.5 * std::cos(2.0 * M_PI * k / 80.0);
            const double u = k - 40 - frac;
            const double sinc = u == 0.0 ? 1.0 : std::sin(M_PI * u) / (M_PI * u);
            oracle[idx] += amp * window * sinc;
        }
    }
    double oracle_energy = 0.0;
    for (double v : oracle) oracle_energy += v * v;
    CHECK(total_energy(rir) == doctest::Approx(oracle_energy).epsilon(1e-8));
}

TEST_CASE("energy envelope decays across 20 ms blocks after the direct arrival") {
    auto scene = RoomScene::make(7.0, 8.0, 0.35, 16000.0, 2000);
    scene.max_order = 6;
    const Signal rir = simulate_rir(scene, Point{2.0, 3.0}, Point{5.0, 6.2});

    const long onset = static_cast<long>(std::hypot(3.0, 3.2) * 16000.0 / 343.0);
    const long block = 320;  // 20 ms
    std::vector<double> energies;
    for (long start = onset; start + block <= rir.size(); start += block) {
        double e = 0.0;
        for (long t = start; t < start + block; ++t) e += rir.samples[t] * rir.samples[t];
        energies.push_back(e);
    }
    REQUIRE(energies.size() >= 4);
    for (size_t i = 1; i < energies.size(); ++i) CHECK(energies[i] <= energies[i - 1]);
}

TEST_CASE("swapping source and receiver gives the bit-identical RIR") {
    auto scene = RoomScene::make(7.0, 8.0, 0.35, 16000.0, 1500);
    const Point a{1.2, 2.3};
    const Point b{5.4, 6.1};
    const Signal ab = simulate_rir(scene, a, b);
    const Signal ba = simulate_rir(scene, b, a);
    REQUIRE(ab.size() == ba.size());
    for (long t = 0; t < ab.size(); ++t) CHECK(ab.samples[t] == ba.samples[t]);
}

TEST_CASE("raising max_order past the automatic choice changes nothing") {
    auto scene = RoomScene::make(7.0, 8.0, 0.35, 16000.0, 800);
    const Point src{2.0, 3.0}, rcv{4.0, 5.0};
    const int auto_order = default_max_order(scene, src, rcv);
    CHECK(auto_order >= 1);

    scene.max_order = auto_order;
    const Signal base = simulate_rir(scene, src, rcv);
    scene.max_order = auto_order + 3;
    const Signal more = simulate_rir(scene, src, rcv);
    for (long t = 0; t < base.size(); ++t) CHECK(base.samples[t] == more.samples[t]);
}

TEST_CASE("increasing absorption never increases total energy") {
    auto scene = RoomScene::make(7.0, 8.0, 0.0, 16000.0, 2000);
    scene.max_order = 5;
    double prev = std::numeric_limits<double>::infinity();
    for (double a : {0.0, 0.2, 0.5, 0.8, 1.0}) {
        scene.set_absorption(a);
        const double e = total_energy(simulate_rir(scene, Point{2.0, 3.0}, Point{5.0, 6.2}));
        CHECK(e <= prev);
        prev = e;
    }
}

TEST_CASE("degenerate geometry is rejected") {
    auto scene = RoomScene::make(7.0, 8.0, 0.35, 16000.0, 100);
    CHECK_THROWS_AS(simulate_rir(scene, Point{1.0, 1.0}, Point{5.0, 5.0}),
                    InvalidInput);  // direct path beyond the RIR window
    scene.rir_len = 2000;
    CHECK_THROWS_AS(simulate_rir(scene, Point{1.0, 1.0}, Point{1.0, 1.0}), InvalidInput);
    CHECK_THROWS_AS(simulate_rir(scene, Point{-1.0, 1.0}, Point{5.0, 5.0}), InvalidInput);
    CHECK_THROWS_AS(image_sources(scene, Point{7.0, 1.0}, 2), InvalidInput);  // on the wall
    CHECK_THROWS_AS(RoomScene::make(0.0, 8.0, 0.35), InvalidInput);
    CHECK_THROWS_AS(RoomScene::make(7.0, 8.0, 1.5), InvalidInput);
}

}  // TEST_SUITE
