#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "privaudio/errors.hpp"
#include "privaudio/philox.hpp"
#include "privaudio/resample.hpp"
#include "privaudio/wav.hpp"

using namespace privaudio;

namespace {

std::string temp_path(const std::string& name) {
    return std::string("/tmp/privaudio_test_") + name;
}

WavData random_wav(int channels, long frames, std::uint64_t seed) {
    WavData data;
    data.sample_rate_hz = 16000.0;
    for (int c = 0; c < channels; ++c) {
        std::vector<double> ch(frames);
        Philox(seed + c).fill_normal(ch.data(), frames);
        for (double& v : ch) v *= 0.2;
        data.channels.push_back(std::move(ch));
    }
    return data;
}

}  // namespace

TEST_SUITE("wav") {

TEST_CASE("double-precision files round trip bit for bit") {
    const WavData data = random_wav(3, 777, 10);
    const std::string path = temp_path("f64.wav");
    write_wav(path, data, WavFormat::Float64);
    const WavData back = read_wav(path);

    REQUIRE(back.channels.size() == 3);
    REQUIRE(back.frames() == 777);
    CHECK(back.sample_rate_hz == 16000.0);
    for (int c = 0; c < 3; ++c) {
        for (long t = 0; t < 777; ++t) {
            CHECK(back.channels[c][t] == data.channels[c][t]);
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("float and integer formats round trip within their precision") {
    const WavData data = random_wav(2, 500, 20);
    const std::string p32 = temp_path("f32.wav");
    const std::string p16 = temp_path("p16.wav");
    write_wav(p32, data, WavFormat::Float32);
    write_wav(p16, data, WavFormat::Pcm16);

    const WavData b32 = read_wav(p32);
    const WavData b16 = read_wav(p16);
    for (int c = 0; c < 2; ++c) {
        for (long t = 0; t < 500; ++t) {
            CHECK(b32.channels[c][t] ==
                  doctest::Approx(data.channels[c][t]).epsilon(1e-7));
            CHECK(std::abs(b16.channels[c][t] - data.channels[c][t]) <= 1.0 / 32767.0);
        }
    }
    std::remove(p32.c_str());
    std::remove(p16.c_str());
}

TEST_CASE("mono helpers preserve the sample rate and reject multichannel files") {
    Signal s = Signal::zeros(300, 22050.0);
    Philox(30).fill_normal(s.samples.data(), s.size());
    const std::string path = temp_path("mono.wav");
    write_wav_mono(path, s);
    const Signal back = read_wav_mono(path);
    CHECK(back.sample_rate_hz == 22050.0);
    REQUIRE(back.size() == 300);
    for (long t = 0; t < 300; ++t) CHECK(back.samples[t] == s.samples[t]);
    std::remove(path.c_str());

    const std::string stereo = temp_path("stereo.wav");
    write_wav(stereo, random_wav(2, 100, 40));
    CHECK_THROWS_AS(read_wav_mono(stereo), IoError);
    std::remove(stereo.c_str());
}

TEST_CASE("malformed files are rejected") {
    const std::string path = temp_path("broken.wav");
    {
        std::ofstream f(path, std::ios::binary);
        f << "RIFFgarbage that is not a wave file at all";
    }
    CHECK_THROWS_AS(read_wav(path), IoError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_wav(temp_path("does_not_exist.wav")), IoError);

    WavData empty;
    empty.sample_rate_hz = 16000.0;
    CHECK_THROWS_AS(write_wav(temp_path("empty.wav"), empty), InvalidInput);
}

TEST_CASE("resampling to the same rate is the identity") {
    Signal s = Signal::zeros(400, 16000.0);
    Philox(50).fill_normal(s.samples.data(), s.size());
    const Signal same = resample(s, 16000.0);
    REQUIRE(same.size() == 400);
    for (long t = 0; t < 400; ++t) CHECK(same.samples[t] == s.samples[t]);
}

TEST_CASE("downsampling preserves an in-band tone") {
    const double fs = 48000.0, f0 = 1000.0;
    Signal tone = Signal::zeros(48000, fs);
    for (long t = 0; t < tone.size(); ++t) {
        tone.samples[t] = std::sin(2.0 * M_PI * f0 * t / fs);
    }
    const Signal down = resample(tone, 16000.0);
    CHECK(down.size() == 16000);
    CHECK(down.sample_rate_hz == 16000.0);

    // Compare against the ideal tone away from the filter edges.
    double err = 0.0, ref = 0.0;
    for (long t = 200; t < down.size() - 200; ++t) {
        const double ideal = std::sin(2.0 * M_PI * f0 * t / 16000.0);
        err += (down.samples[t] - ideal) * (down.samples[t] - ideal);
        ref += ideal * ideal;
    }
    CHECK(std::sqrt(err / ref) <= 1e-3);
}

TEST_CASE("resampled length follows the rate ratio") {
    Signal s = Signal::zeros(16000, 16000.0);
    Philox(60).fill_normal(s.samples.data(), s.size());
    CHECK(resample(s, 10000.0).size() == 10000);
    CHECK(resample(s, 8000.0).size() == 8000);
    CHECK(resample(Signal::zeros(1001, 16000.0), 10000.0).size() ==
          std::lround(1001.0 * 10000.0 / 16000.0));
}

}  // TEST_SUITE
