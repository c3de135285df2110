#pragma once

#include <array>
#include <vector>

#include "privaudio/signal.hpp"

namespace privaudio {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Rectangular 2-D room simulated with the image-source model.
///
/// Walls are indexed west (x=0), east (x=width), south (y=0), north
/// (y=height). A single scalar `absorption` fills all four by default;
/// per-wall values may be set explicitly.
struct RoomScene {
    static constexpr int kAutoOrder = -1;

    double width = 0.0;   // meters
    double height = 0.0;  // meters
    std::array<double, 4> wall_absorption = {0.0, 0.0, 0.0, 0.0};
    double speed_of_sound = 343.0;   // m/s
    double sample_rate_hz = 16000.0;
    int max_order = kAutoOrder;      // kAutoOrder: derived from the RIR window
    long rir_len = 2000;             // samples

    static RoomScene make(double width, double height, double absorption,
                          double sample_rate_hz = 16000.0, long rir_len = 2000);

    void set_absorption(double a) { wall_absorption = {a, a, a, a}; }
    bool inside(const Point& p) const {
        return p.x > 0.0 && p.x < width && p.y > 0.0 && p.y < height;
    }
    void validate() const;
};

struct ImageSource {
    Point position;
    int reflections = 0;
};

/// All image positions of `src` up to the given reflection order (order 0 is
/// the source itself). Strictly-interior sources never produce duplicates.
std::vector<ImageSource> image_sources(const RoomScene& scene, const Point& src, int order);

/// Reflection order used when scene.max_order is kAutoOrder: orders grow until
/// every image of the next order lies beyond the RIR travel window, so no
/// in-window energy is truncated.
int default_max_order(const RoomScene& scene, const Point& src, const Point& rcv);

/// Image-source RIR between a source and receiver point. Each image
/// contributes an 81-tap Hann-windowed sinc pulse at its fractional delay,
/// scaled by prod_w (1-absorption_w)^bounces_w / distance.
Signal simulate_rir(const RoomScene& scene, const Point& src, const Point& rcv);

}  // namespace privaudio
