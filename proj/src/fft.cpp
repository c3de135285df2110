#include "privaudio/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace privaudio {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

namespace {

struct PlanPair {
    fftw_plan fwd;
    fftw_plan inv;
};

// Shared process-wide plan cache; plans live for the process lifetime.
PlanPair plans_for(std::size_t n) {
    static std::mutex mtx;
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    std::vector<double> re(n);
    std::vector<fftw_complex> cx(n / 2 + 1);
    // FFTW_UNALIGNED lets the plans run on arbitrary caller buffers.
    PlanPair p;
    p.fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(), cx.data(),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), cx.data(), re.data(),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
    if (p.fwd == nullptr || p.inv == nullptr) {
        throw std::runtime_error("fftw plan creation failed");
    }
    cache.emplace(n, p);
    return p;
}

}  // namespace

RealFft::RealFft(std::size_t size) : n_(size) {
    if (size == 0 || (size & (size - 1)) != 0) {
        throw std::invalid_argument("RealFft size must be a power of two");
    }
    PlanPair p = plans_for(size);
    plan_fwd_ = p.fwd;
    plan_inv_ = p.inv;
}

void RealFft::forward(const double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
}

void RealFft::inverse(const std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inv_),
                         reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                         out);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        out[i] *= scale;
    }
}

std::vector<std::complex<double>> RealFft::spectrum(const double* in, std::size_t len) const {
    std::vector<double> padded(n_, 0.0);
    std::memcpy(padded.data(), in, len * sizeof(double));
    std::vector<std::complex<double>> out(bins());
    forward(padded.data(), out.data());
    return out;
}

}  // namespace privaudio
