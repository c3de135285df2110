#include "privaudio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "privaudio/errors.hpp"

namespace privaudio {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

WavData read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path);
    }
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();
    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
        throw IoError(path + ": not a RIFF/WAVE file");
    }

    std::uint16_t format = 0;
    std::uint16_t num_channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
    const unsigned char* data_ptr = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= n) {
        const char* id = bytes.data() + pos;
        const std::uint32_t len = get_u32(p + pos + 4);
        const std::size_t body = pos + 8;
        if (body + len > n) {
            throw IoError(path + ": truncated chunk");
        }
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (len < 16) {
                throw IoError(path + ": bad fmt chunk");
            }
            format = get_u16(p + body);
            num_channels = get_u16(p + body + 2);
            sample_rate = get_u32(p + body + 4);
            bits = get_u16(p + body + 14);
            if (format == kFormatExtensible && len >= 40) {
                format = get_u16(p + body + 24);  // first two bytes of the subformat GUID
            }
        } else if (std::memcmp(id, "data", 4) == 0) {
            data_ptr = p + body;
            data_len = len;
        }
        pos = body + len + (len & 1);  // chunks are word-aligned
    }
    if (num_channels == 0 || sample_rate == 0 || data_ptr == nullptr) {
        throw IoError(path + ": missing fmt or data chunk");
    }

    const std::size_t bytes_per_sample = bits / 8;
    if (bytes_per_sample == 0) {
        throw IoError(path + ": bad bit depth");
    }
    const std::size_t frame_bytes = bytes_per_sample * num_channels;
    const std::size_t frames = data_len / frame_bytes;

    WavData out;
    out.sample_rate_hz = static_cast<double>(sample_rate);
    out.channels.assign(num_channels, std::vector<double>(frames));
    for (std::size_t fidx = 0; fidx < frames; ++fidx) {
        for (std::size_t c = 0; c < num_channels; ++c) {
            const unsigned char* s = data_ptr + fidx * frame_bytes + c * bytes_per_sample;
            double v = 0.0;
            if (format == kFormatPcm && bits == 16) {
                std::int16_t raw;
                std::memcpy(&raw, s, 2);
                v = static_cast<double>(raw) / 32768.0;
            } else if (format == kFormatPcm && bits == 32) {
                std::int32_t raw;
                std::memcpy(&raw, s, 4);
                v = static_cast<double>(raw) / 2147483648.0;
            } else if (format == kFormatIeeeFloat && bits == 32) {
                float raw;
                std::memcpy(&raw, s, 4);
                v = static_cast<double>(raw);
            } else if (format == kFormatIeeeFloat && bits == 64) {
                std::memcpy(&v, s, 8);
            } else {
                throw IoError(path + ": unsupported sample format");
            }
            out.channels[c][fidx] = v;
        }
    }
    return out;
}

void write_wav(const std::string& path, const WavData& data, WavFormat fmt) {
    if (data.channels.empty()) {
        throw InvalidInput("write_wav: no channels");
    }
    const std::size_t frames = data.frames();
    for (const auto& ch : data.channels) {
        if (ch.size() != frames) {
            throw InvalidInput("write_wav: channel lengths differ");
        }
    }
    const std::uint16_t num_channels = static_cast<std::uint16_t>(data.channels.size());
    std::uint16_t bits = 16;
    std::uint16_t format = kFormatPcm;
    if (fmt == WavFormat::Float32) {
        bits = 32;
        format = kFormatIeeeFloat;
    } else if (fmt == WavFormat::Float64) {
        bits = 64;
        format = kFormatIeeeFloat;
    }
    const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(data.sample_rate_hz));
    const std::uint16_t block = static_cast<std::uint16_t>(num_channels * bits / 8);
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * block);
    const bool with_fact = format == kFormatIeeeFloat;

    std::string out;
    out.reserve(64 + data_bytes);
    out += "RIFF";
    const std::uint32_t riff_len = 4 + (8 + 16) + (with_fact ? 12 : 0) + 8 + data_bytes;
    put_u32(out, riff_len);
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, format);
    put_u16(out, num_channels);
    put_u32(out, rate);
    put_u32(out, rate * block);
    put_u16(out, block);
    put_u16(out, bits);
    if (with_fact) {
        out += "fact";
        put_u32(out, 4);
        put_u32(out, static_cast<std::uint32_t>(frames));
    }
    out += "data";
    put_u32(out, data_bytes);

    for (std::size_t fidx = 0; fidx < frames; ++fidx) {
        for (std::size_t c = 0; c < num_channels; ++c) {
            const double v = data.channels[c][fidx];
            if (fmt == WavFormat::Pcm16) {
                // Same 1/32768 step as the reader; +1.0 clamps to the top code.
                const long level = std::lround(std::clamp(v, -1.0, 1.0) * 32768.0);
                const std::int16_t raw = static_cast<std::int16_t>(std::clamp(level, -32768L, 32767L));
                out.push_back(static_cast<char>(raw & 0xFF));
                out.push_back(static_cast<char>((raw >> 8) & 0xFF));
            } else if (fmt == WavFormat::Float32) {
                const float raw = static_cast<float>(v);
                char buf[4];
                std::memcpy(buf, &raw, 4);
                out.append(buf, 4);
            } else {
                char buf[8];
                std::memcpy(buf, &v, 8);
                out.append(buf, 8);
            }
        }
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot write " + path);
    }
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) {
        throw IoError("write failed for " + path);
    }
}

Signal read_wav_mono(const std::string& path) {
    WavData d = read_wav(path);
    if (d.channels.size() != 1) {
        throw IoError(path + ": expected a mono file, got " +
                      std::to_string(d.channels.size()) + " channels");
    }
    return Signal(std::move(d.channels[0]), d.sample_rate_hz);
}

void write_wav_mono(const std::string& path, const Signal& s, WavFormat fmt) {
    WavData d;
    d.sample_rate_hz = s.sample_rate_hz;
    d.channels.push_back(s.samples);
    write_wav(path, d, fmt);
}

}  // namespace privaudio
