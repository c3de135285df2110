#include "privaudio/room.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "privaudio/errors.hpp"

namespace privaudio {
namespace {

// Fractional delays use an 81-tap Hann-windowed sinc centered on tap 40.
constexpr int kKernelHalf = 40;
constexpr int kKernelLen = 2 * kKernelHalf + 1;

double windowed_sinc(int k, double frac) {
    const double window = 0.5 - 0.5 * std::cos(2.0 * M_PI * k / (kKernelLen - 1));
    const double u = k - kKernelHalf - frac;
    if (u == 0.0) return window;
    return window * std::sin(M_PI * u) / (M_PI * u);
}

struct Contribution {
    double delay_samples;
    double amplitude;
};

// Axis offsets between an image of `src` and `rcv`, written so the swapped
// pair (rcv, src) yields the same squared offset bit-for-bit: the mirrored
// branch is symmetric in (src + rcv), the unmirrored branch flips sign with
// the lattice index, and squaring discards the sign.
double axis_offset(int m, int mirrored, double span, double src, double rcv) {
    if (mirrored) return 2.0 * m * span - (src + rcv);
    return 2.0 * m * span + (src - rcv);
}

int axis_counts(int m, int mirrored, int* lo_wall, int* hi_wall) {
    *lo_wall = std::abs(m - mirrored);
    *hi_wall = std::abs(m);
    return *lo_wall + *hi_wall;
}

// (1-absorption)^count by repeated multiplication: deterministic and
// identical across source/receiver swaps, unlike libm pow.
std::vector<double> reflection_powers(double absorption, int max_count) {
    std::vector<double> powers(max_count + 1);
    powers[0] = 1.0;
    for (int c = 1; c <= max_count; ++c) powers[c] = powers[c - 1] * (1.0 - absorption);
    return powers;
}

void check_points(const RoomScene& scene, const Point& src, const Point& rcv) {
    if (!std::isfinite(src.x) || !std::isfinite(src.y) || !std::isfinite(rcv.x) ||
        !std::isfinite(rcv.y)) {
        throw InvalidInput("room: source/receiver coordinates must be finite");
    }
    if (!scene.inside(src)) throw InvalidInput("room: source must lie strictly inside the room");
    if (!scene.inside(rcv)) throw InvalidInput("room: receiver must lie strictly inside the room");
}

double min_image_distance(const RoomScene& scene, const Point& src, const Point& rcv, int order) {
    double best = std::numeric_limits<double>::infinity();
    const int span = order / 2 + 1;
    for (int qx = 0; qx <= 1; ++qx) {
        for (int mx = -span; mx <= span; ++mx) {
            int lo, hi;
            const int cx = axis_counts(mx, qx, &lo, &hi);
            if (cx > order) continue;
            const double dx = axis_offset(mx, qx, scene.width, src.x, rcv.x);
            for (int qy = 0; qy <= 1; ++qy) {
                for (int my = -span; my <= span; ++my) {
                    const int cy = axis_counts(my, qy, &lo, &hi);
                    if (cx + cy != order) continue;
                    const double dy = axis_offset(my, qy, scene.height, src.y, rcv.y);
                    best = std::min(best, std::sqrt(dx * dx + dy * dy));
                }
            }
        }
    }
    return best;
}

}  // namespace

RoomScene RoomScene::make(double width, double height, double absorption, double sample_rate_hz,
                          long rir_len) {
    RoomScene scene;
    scene.width = width;
    scene.height = height;
    scene.set_absorption(absorption);
    scene.sample_rate_hz = sample_rate_hz;
    scene.rir_len = rir_len;
    scene.validate();
    return scene;
}

void RoomScene::validate() const {
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
        throw InvalidInput("room: width and height must be positive and finite");
    }
    for (double a : wall_absorption) {
        if (!(a >= 0.0 && a <= 1.0)) throw InvalidInput("room: absorption must be in [0, 1]");
    }
    if (!(speed_of_sound > 0.0)) throw InvalidInput("room: speed of sound must be positive");
    if (!(sample_rate_hz > 0.0)) throw InvalidInput("room: sample rate must be positive");
    if (rir_len < 1) throw InvalidInput("room: rir_len must be at least 1");
    if (max_order < kAutoOrder) throw InvalidInput("room: max_order must be >= 0 or auto");
}

std::vector<ImageSource> image_sources(const RoomScene& scene, const Point& src, int order) {
    scene.validate();
    if (order < 0) throw InvalidInput("room: reflection order must be nonnegative");
    if (!scene.inside(src)) throw InvalidInput("room: source must lie strictly inside the room");

    // A strictly interior source makes every (m, mirrored) pair a distinct
    // position, so no dedup pass is needed.
    std::vector<ImageSource> images;
    const int span = order / 2 + 1;
    for (int qx = 0; qx <= 1; ++qx) {
        for (int mx = -span; mx <= span; ++mx) {
            int lo, hi;
            const int cx = axis_counts(mx, qx, &lo, &hi);
            if (cx > order) continue;
            const double x = 2.0 * mx * scene.width + (1 - 2 * qx) * src.x;
            for (int qy = 0; qy <= 1; ++qy) {
                for (int my = -span; my <= span; ++my) {
                    const int cy = axis_counts(my, qy, &lo, &hi);
                    if (cx + cy > order) continue;
                    const double y = 2.0 * my * scene.height + (1 - 2 * qy) * src.y;
                    images.push_back({{x, y}, cx + cy});
                }
            }
        }
    }
    return images;
}

int default_max_order(const RoomScene& scene, const Point& src, const Point& rcv) {
    // Anything farther than this cannot write a tap inside [0, rir_len).
    const double max_dist =
        (scene.rir_len + kKernelHalf + 1) * scene.speed_of_sound / scene.sample_rate_hz;
    const double min_span = std::min(scene.width, scene.height);

    int candidate = -1;
    for (int order = 1; order < 10000; ++order) {
        if (min_image_distance(scene, src, rcv, order) > max_dist) {
            if (candidate < 0) candidate = order;
            // Every order-o image is at least (o-6)/2 * min(W,H) away, so once
            // that bound clears the window no later order can re-enter it.
            if ((order - 6) * 0.5 * min_span > max_dist) return candidate;
        } else {
            candidate = -1;
        }
    }
    throw InvalidInput("room: reflection order search did not terminate");
}

Signal simulate_rir(const RoomScene& scene, const Point& src, const Point& rcv) {
    scene.validate();
    check_points(scene, src, rcv);

    const double fs = scene.sample_rate_hz;
    const double c = scene.speed_of_sound;
    const double direct_dx = src.x - rcv.x;
    const double direct_dy = src.y - rcv.y;
    const double direct_dist = std::sqrt(direct_dx * direct_dx + direct_dy * direct_dy);
    if (!(direct_dist > 0.0)) {
        throw InvalidInput("room: source and receiver must not coincide");
    }
    if (direct_dist * fs / c >= static_cast<double>(scene.rir_len)) {
        throw InvalidInput("room: direct path arrives beyond the RIR window");
    }

    const int order =
        scene.max_order == RoomScene::kAutoOrder ? default_max_order(scene, src, rcv) : scene.max_order;
    const auto pow_west = reflection_powers(scene.wall_absorption[0], order + 1);
    const auto pow_east = reflection_powers(scene.wall_absorption[1], order + 1);
    const auto pow_south = reflection_powers(scene.wall_absorption[2], order + 1);
    const auto pow_north = reflection_powers(scene.wall_absorption[3], order + 1);

    std::vector<Contribution> taps;
    const int span = order / 2 + 1;
    for (int qx = 0; qx <= 1; ++qx) {
        for (int mx = -span; mx <= span; ++mx) {
            int west, east;
            const int cx = axis_counts(mx, qx, &west, &east);
            if (cx > order) continue;
            const double dx = axis_offset(mx, qx, scene.width, src.x, rcv.x);
            const double gain_x = pow_west[west] * pow_east[east];
            for (int qy = 0; qy <= 1; ++qy) {
                for (int my = -span; my <= span; ++my) {
                    int south, north;
                    const int cy = axis_counts(my, qy, &south, &north);
                    if (cx + cy > order) continue;
                    const double dy = axis_offset(my, qy, scene.height, src.y, rcv.y);
                    const double dist = std::sqrt(dx * dx + dy * dy);
                    if (!(dist > 0.0)) continue;
                    const double delay = dist * fs / c;
                    if (std::floor(delay) - kKernelHalf >= static_cast<double>(scene.rir_len)) {
                        continue;
                    }
                    const double amp = gain_x * pow_south[south] * pow_north[north] / dist;
                    if (amp == 0.0) continue;
                    taps.push_back({delay, amp});
                }
            }
        }
    }

    // Canonical accumulation order: with the symmetric offsets above, a
    // source/receiver swap produces the same (delay, amplitude) multiset, and
    // sorting makes the floating-point sums identical bit for bit.
    std::sort(taps.begin(), taps.end(), [](const Contribution& a, const Contribution& b) {
        if (a.delay_samples != b.delay_samples) return a.delay_samples < b.delay_samples;
        return a.amplitude < b.amplitude;
    });

    Signal rir = Signal::zeros(scene.rir_len, fs);
    for (const Contribution& tap : taps) {
        const double base = std::floor(tap.delay_samples);
        const double frac = tap.delay_samples - base;
        const long start = static_cast<long>(base) - kKernelHalf;
        for (int k = 0; k < kKernelLen; ++k) {
            const long idx = start + k;
            if (idx < 0 || idx >= scene.rir_len) continue;
            rir.samples[idx] += tap.amplitude * windowed_sinc(k, frac);
        }
    }
    return rir;
}

}  // namespace privaudio
