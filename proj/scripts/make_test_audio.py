#!/usr/bin/env python3
"""Synthesizes the committed speech-like test clips.

The clips are vowel/fricative syllable sequences with pauses: enough envelope
modulation across the one-third-octave bands for intelligibility scoring to
behave as it does on real speech, while keeping the repository free of
third-party recordings. Deterministic given the seeds below.

Run from the repository root:  python3 scripts/make_test_audio.py
"""

import numpy as np
from scipy import signal as sps
from scipy.io import wavfile

FS = 16000

VOWELS = {
    "a": [(730, 90), (1090, 110), (2440, 170)],
    "e": [(530, 90), (1840, 110), (2480, 170)],
    "i": [(270, 90), (2290, 110), (3010, 170)],
    "o": [(570, 90), (840, 110), (2410, 170)],
    "u": [(300, 90), (870, 110), (2240, 170)],
}


def resonator(x, fc, bw, fs):
    r = np.exp(-np.pi * bw / fs)
    theta = 2 * np.pi * fc / fs
    b = [1.0 - r]
    a = [1.0, -2 * r * np.cos(theta), r * r]
    return sps.lfilter(b, a, x)


def vowel(name, f0, dur, rng):
    n = int(dur * FS)
    t = np.arange(n) / FS
    # Glottal pulse train with vibrato and slight jitter.
    freq = f0 * (1 + 0.03 * np.sin(2 * np.pi * 5.5 * t) + 0.01 * rng.standard_normal())
    phase = np.cumsum(freq) / FS
    pulses = np.diff(np.floor(phase), prepend=0.0)
    out = pulses
    for fc, bw in VOWELS[name]:
        out = resonator(out, fc, bw, FS)
    att = min(n // 6, 320)
    env = np.ones(n)
    env[:att] = np.linspace(0, 1, att)
    env[-att:] = np.linspace(1, 0, att)
    return out * env


def fricative(dur, rng):
    n = int(dur * FS)
    noise = rng.standard_normal(n)
    sos = sps.butter(4, [3000, 7000], btype="band", fs=FS, output="sos")
    out = sps.sosfilt(sos, noise)
    env = sps.windows.hann(n)
    return out * env


def sentence(duration, seed):
    rng = np.random.default_rng(seed)
    vowel_names = list(VOWELS)
    parts = []
    total = 0
    target = int(duration * FS)
    while total < target:
        kind = rng.random()
        if kind < 0.62:
            name = vowel_names[rng.integers(len(vowel_names))]
            f0 = rng.uniform(95, 180)
            piece = vowel(name, f0, rng.uniform(0.12, 0.28), rng)
            piece = piece / (np.max(np.abs(piece)) + 1e-12)
        elif kind < 0.82:
            piece = fricative(rng.uniform(0.06, 0.14), rng)
            piece = 0.35 * piece / (np.max(np.abs(piece)) + 1e-12)
        else:
            piece = np.zeros(int(rng.uniform(0.05, 0.1) * FS))
        parts.append(piece)
        total += len(piece)
    x = np.concatenate(parts)[:target]
    return 0.5 * x / np.max(np.abs(x))


def write(name, x):
    pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    wavfile.write(name, FS, pcm)
    print(f"{name}: {len(x) / FS:.2f} s")


def main():
    write("tests/data/voice_a.wav", sentence(1.0, seed=11))
    write("tests/data/voice_b.wav", sentence(1.0, seed=22))
    write("tests/data/voice_long.wav", sentence(3.0, seed=33))

    # Degraded copies at fixed white-noise SNRs; frozen as files so every
    # implementation scores the exact same sample values.
    rate, clean = wavfile.read("tests/data/voice_long.wav")
    clean = clean.astype(np.float64) / 32768.0
    rng = np.random.default_rng(777)
    for snr_db in (20, 10, 0, -10):
        noise = rng.standard_normal(len(clean))
        noise *= np.linalg.norm(clean) / np.linalg.norm(noise) * 10 ** (-snr_db / 20)
        write(f"tests/data/voice_long_snr{snr_db}.wav", clean + noise)

    rate, a = wavfile.read("tests/data/voice_a.wav")
    a = a.astype(np.float64) / 32768.0
    noise = rng.standard_normal(len(a))
    noise *= np.linalg.norm(a) / np.linalg.norm(noise)
    write("tests/data/voice_a_snr0.wav", a + noise)


if __name__ == "__main__":
    main()
