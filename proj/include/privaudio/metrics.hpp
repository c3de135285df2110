#pragma once

#include "privaudio/signal.hpp"

namespace privaudio {

/// ||test - reference|| / ||reference||. Throws on length mismatch or an
/// all-zero reference.
double relative_error(const Signal& reference, const Signal& test);

/// Relative error after the scalar gain on `test` that minimizes it
/// (alpha = <ref, test>/||test||^2); an all-zero test scores 1.
double relative_error_optscale(const Signal& reference, const Signal& test);

/// 10*log10(||ref||^2 / ||test - ref||^2); identical signals return +inf.
double snr_db(const Signal& reference, const Signal& test);

/// Diagnostic lag (samples) maximizing |cross-correlation|; positive means
/// `test` lags `reference`. Reported alongside metrics, never applied.
long align_lag(const Signal& reference, const Signal& test);

}  // namespace privaudio
