#include "privaudio/philox.hpp"

#include <cmath>

namespace privaudio {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::uint32_t ctr[4], std::uint32_t key[2]) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t out0 = hi1 ^ ctr[1] ^ key[0];
    const std::uint32_t out2 = hi0 ^ ctr[3] ^ key[1];
    ctr[0] = out0;
    ctr[1] = lo1;
    ctr[2] = out2;
    ctr[3] = lo0;
    key[0] += kWeyl0;
    key[1] += kWeyl1;
}

inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
    // 53 significant bits; result lies in (0, 1] so log() is always finite.
    const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>((v >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> Philox::block(std::uint64_t counter) const {
    std::uint32_t ctr[4] = {
        static_cast<std::uint32_t>(counter),
        static_cast<std::uint32_t>(counter >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32),
    };
    std::uint32_t key[2] = {key_lo_, key_hi_};
    for (int r = 0; r < 10; ++r) {
        round_once(ctr, key);
    }
    return {ctr[0], ctr[1], ctr[2], ctr[3]};
}

double Philox::uniform(std::uint64_t n) const {
    const auto w = block(n);
    return to_unit_open(w[0], w[1]);
}

double Philox::normal(std::uint64_t n) const {
    const auto w = block(n / 2);
    const double u1 = to_unit_open(w[0], w[1]);
    const double u2 = to_unit_open(w[2], w[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    return (n % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
}

void Philox::fill_normal(double* out, std::size_t count, std::uint64_t first_index) const {
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = normal(first_index + i);
    }
}

}  // namespace privaudio
