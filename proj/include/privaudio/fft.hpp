#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace privaudio {

std::size_t next_pow2(std::size_t n);

/// Real-input FFT of fixed power-of-two size, backed by FFTW.
///
/// Plans are cached per size and shared; creation is mutex-guarded, execution
/// is re-entrant on distinct buffers. Plans use FFTW_ESTIMATE so planning is
/// deterministic run to run.
class RealFft {
public:
    explicit RealFft(std::size_t size);

    std::size_t size() const { return n_; }
    std::size_t bins() const { return n_ / 2 + 1; }

    /// in: size() reals. out: bins() complex values.
    void forward(const double* in, std::complex<double>* out) const;

    /// Inverse of forward, scaled 1/size() so inverse(forward(x)) == x.
    void inverse(const std::complex<double>* in, double* out) const;

    /// Forward transform of a sequence zero-padded to size().
    std::vector<std::complex<double>> spectrum(const double* in, std::size_t len) const;

private:
    std::size_t n_;
    void* plan_fwd_;
    void* plan_inv_;
};

}  // namespace privaudio
