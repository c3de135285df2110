#pragma once

#include "privaudio/signal.hpp"

namespace privaudio {

/// Fixed parameters of the short-time objective intelligibility measure.
/// These are the published reference values; golden tests pin the resulting
/// scores against an independent implementation, so treat them as frozen.
struct StoiConfig {
    static constexpr double internal_rate_hz = 10000.0;
    static constexpr int frame_len = 256;
    static constexpr int hop = 128;
    static constexpr int fft_len = 512;
    static constexpr int bands = 15;
    static constexpr double min_center_hz = 150.0;
    static constexpr int segment_frames = 30;
    static constexpr double dyn_range_db = 40.0;
    static constexpr double clip_sdr_db = -15.0;
};

/// Intelligibility of `degraded` with `clean` as the reference, in ~[0, 1]:
/// the mean over one-third-octave bands and 384 ms segments of the clipped
/// correlation between temporal envelopes. Both signals are resampled to
/// 10 kHz internally; silent stretches of the clean signal are removed from
/// both. Throws if lengths differ, the clean signal is silent, or fewer than
/// 30 analysis frames survive.
double stoi(const Signal& clean, const Signal& degraded);

}  // namespace privaudio
