#!/usr/bin/env python3
"""Independent reference scorer used to freeze the golden values in
tests/test_stoi.cpp.

This is a NumPy transcription of the original short-time objective
intelligibility measure (10 kHz internal rate, 256-sample frames with hop
128, 512-point FFT, 15 one-third-octave bands from 150 Hz, 30-frame
segments, -15 dB clipping, 40 dB silence threshold). It shares no code with
the C++ implementation; agreement within +/-0.02 is the acceptance bar.

Run from the repository root:  python3 scripts/stoi_reference.py
"""

import sys

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

FS = 10000
N_FRAME = 256
HOP = 128
NFFT = 512
NUM_BANDS = 15
MIN_FREQ = 150.0
SEG = 30
BETA = -15.0
DYN_RANGE = 40.0
EPS = np.finfo(np.float64).eps


def hann_ref(n):
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(1, n + 1) / (n + 1))


def third_octave_matrix():
    freqs = np.arange(NFFT // 2 + 1) * FS / NFFT
    obm = np.zeros((NUM_BANDS, len(freqs)))
    for j in range(NUM_BANDS):
        lo_edge = MIN_FREQ * 2 ** ((2 * j - 1) / 6)
        hi_edge = MIN_FREQ * 2 ** ((2 * j + 1) / 6)
        lo = int(np.argmin(np.square(freqs - lo_edge)))
        hi = int(np.argmin(np.square(freqs - hi_edge)))
        obm[j, lo:hi] = 1
    return obm


def remove_silent_frames(x, y):
    w = hann_ref(N_FRAME)
    starts = np.arange(0, len(x) - N_FRAME + 1, HOP)
    frames_x = np.array([w * x[i:i + N_FRAME] for i in starts])
    frames_y = np.array([w * y[i:i + N_FRAME] for i in starts])
    energies = 20 * np.log10(np.linalg.norm(frames_x, axis=1) + EPS)
    mask = energies > np.max(energies) - DYN_RANGE
    frames_x, frames_y = frames_x[mask], frames_y[mask]
    out_len = (len(frames_x) - 1) * HOP + N_FRAME
    xs, ys = np.zeros(out_len), np.zeros(out_len)
    for f in range(len(frames_x)):
        xs[f * HOP:f * HOP + N_FRAME] += frames_x[f]
        ys[f * HOP:f * HOP + N_FRAME] += frames_y[f]
    return xs, ys


def band_envelopes(x, obm):
    w = hann_ref(N_FRAME)
    starts = np.arange(0, len(x) - N_FRAME, HOP)  # end-exclusive on purpose
    spec = np.array([np.fft.rfft(w * x[i:i + N_FRAME], NFFT) for i in starts])
    return np.sqrt(obm @ (np.abs(spec) ** 2).T)  # (bands, frames)


def stoi_ref(clean, degraded, fs):
    if fs != FS:
        clean = resample_poly(clean, FS, fs)
        degraded = resample_poly(degraded, FS, fs)
    clean, degraded = remove_silent_frames(clean, degraded)
    obm = third_octave_matrix()
    bx = band_envelopes(clean, obm)
    by = band_envelopes(degraded, obm)
    frames = bx.shape[1]
    assert frames >= SEG, "clip too short after silence removal"

    clip = 1 + 10 ** (-BETA / 20)
    total = 0.0
    for m in range(SEG, frames + 1):
        xs = bx[:, m - SEG:m]
        ys = by[:, m - SEG:m]
        alpha = np.linalg.norm(xs, axis=1, keepdims=True) / (
            np.linalg.norm(ys, axis=1, keepdims=True) + EPS)
        yp = np.minimum(alpha * ys, clip * xs)
        xc = xs - xs.mean(axis=1, keepdims=True)
        yc = yp - yp.mean(axis=1, keepdims=True)
        xc = xc / (np.linalg.norm(xc, axis=1, keepdims=True) + EPS)
        yc = yc / (np.linalg.norm(yc, axis=1, keepdims=True) + EPS)
        total += np.sum(xc * yc)
    return total / ((frames - SEG + 1) * NUM_BANDS)


def load(path):
    rate, data = wavfile.read(path)
    return rate, data.astype(np.float64) / 32768.0


def main():
    pairs = [
        ("tests/data/voice_long.wav", "tests/data/voice_long_snr20.wav"),
        ("tests/data/voice_long.wav", "tests/data/voice_long_snr10.wav"),
        ("tests/data/voice_long.wav", "tests/data/voice_long_snr0.wav"),
        ("tests/data/voice_long.wav", "tests/data/voice_long_snr-10.wav"),
        ("tests/data/voice_a.wav", "tests/data/voice_a_snr0.wav"),
    ]
    for clean_path, degraded_path in pairs:
        rate, clean = load(clean_path)
        rate2, degraded = load(degraded_path)
        assert rate == rate2
        score = stoi_ref(clean, degraded, rate)
        print(f"{degraded_path}: {score:.6f}")


if __name__ == "__main__":
    main()
    sys.exit(0)
