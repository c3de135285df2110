#pragma once

#include <string>
#include <vector>

#include "privaudio/signal.hpp"

namespace privaudio {

enum class WavFormat {
    Pcm16,    // 16-bit signed integer
    Float32,  // IEEE float
    Float64,  // IEEE double; lossless round trip of internal buffers
};

struct WavData {
    std::vector<std::vector<double>> channels;  // [channel][sample]
    double sample_rate_hz = 0.0;

    std::size_t frames() const { return channels.empty() ? 0 : channels[0].size(); }
};

WavData read_wav(const std::string& path);
void write_wav(const std::string& path, const WavData& data, WavFormat fmt = WavFormat::Float64);

/// Reads a mono file; throws IoError if the file has more than one channel.
Signal read_wav_mono(const std::string& path);
void write_wav_mono(const std::string& path, const Signal& s, WavFormat fmt = WavFormat::Float64);

}  // namespace privaudio
