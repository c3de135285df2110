#pragma once

#include "privaudio/signal.hpp"

namespace privaudio {

double bessel_i0(double x);

/// Symmetric Kaiser window of the given length.
std::vector<double> kaiser_window(std::size_t length, double beta);

/// Band-limited rational resampling by windowed-sinc polyphase interpolation
/// (Kaiser window, 64 taps per phase). Output length is
/// round(len * target_hz / source_hz).
Signal resample(const Signal& in, double target_hz);

}  // namespace privaudio
