#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace privaudio {

/// Philox4x32-10 counter-based generator.
///
/// A (seed, stream, counter) triple maps statelessly to random words, so any
/// sample of any stream can be regenerated in isolation. All noise draws in
/// the library go through this class; recording (seed, stream) is enough to
/// reproduce them bit for bit.
class Philox {
public:
    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
        : key_lo_(static_cast<std::uint32_t>(seed)),
          key_hi_(static_cast<std::uint32_t>(seed >> 32)),
          stream_(stream) {}

    std::array<std::uint32_t, 4> block(std::uint64_t counter) const;

    /// Uniform double in (0, 1], sample index n of this stream.
    double uniform(std::uint64_t n) const;

    /// Standard normal sample n (Box-Muller, no rejection).
    double normal(std::uint64_t n) const;

    void fill_normal(double* out, std::size_t count, std::uint64_t first_index = 0) const;

private:
    std::uint32_t key_lo_;
    std::uint32_t key_hi_;
    std::uint64_t stream_;
};

}  // namespace privaudio
