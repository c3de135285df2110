#pragma once

#include "privaudio/signal.hpp"

namespace privaudio {

/// Exponential sine sweep s(t) = sin(2*pi*f1*L*(e^{t/L} - 1)) with
/// L = duration / ln(f2/f1); instantaneous frequency runs f1 -> f2.
Signal generate_ess(double f1_hz, double f2_hz, double duration_s, double sample_rate_hz);

struct DeconvolvedRir {
    Signal rir;
    long onset_delay = 0;  // samples from the sweep's own reference peak to the response peak
    double peak = 0.0;     // normalized amplitude at the aligned response peak
};

/// Recover an impulse response from a sweep recording by convolving with the
/// amplitude-compensated time-reversed sweep, normalizing by the sweep's
/// self-deconvolution peak, and cropping rir_len samples from the response
/// peak. The sweep's rate constant is estimated from its zero crossings, so
/// no generation parameters are needed.
DeconvolvedRir deconvolve_rir(const Signal& recording, const Signal& sweep, long rir_len);

}  // namespace privaudio
