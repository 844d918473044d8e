#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "cnmft/error.hpp"

namespace cnmft {

inline constexpr int kPipelineSampleRate = 44100;

/// Mono audio, samples in [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;

    double seconds() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

namespace detail {

inline uint32_t read_u32le(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline uint16_t read_u16le(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::file_unreadable, "cannot open file: " + path.string());
    in.seekg(0, std::ios::end);
    auto len = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(len));
    if (len > 0) in.read(reinterpret_cast<char*>(bytes.data()), len);
    if (!in) fail(Errc::file_unreadable, "read failed: " + path.string());
    return bytes;
}

} // namespace detail

/// Decodes a RIFF WAV file (PCM, 16- or 24-bit, any channel count) without
/// touching the sample rate. Channels are averaged to mono and samples scaled
/// to [-1, 1].
inline AudioClip load_wav(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        fail(Errc::bad_format, "not a RIFF/WAVE file: " + path.string());

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* hdr = bytes.data() + pos;
        uint32_t chunk_size = detail::read_u32le(hdr + 4);
        std::size_t body = pos + 8;
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (body + 16 > bytes.size()) fail(Errc::bad_format, "truncated fmt chunk");
            format = detail::read_u16le(bytes.data() + body);
            channels = detail::read_u16le(bytes.data() + body + 2);
            sample_rate = detail::read_u32le(bytes.data() + body + 4);
            bits = detail::read_u16le(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data = bytes.data() + body;
            data_len = std::min<std::size_t>(chunk_size, bytes.size() - body);
        }
        pos = body + chunk_size + (chunk_size & 1); // chunks are word-aligned
    }

    if (!have_fmt || sample_rate == 0 || channels == 0)
        fail(Errc::bad_format, "missing or invalid fmt chunk: " + path.string());
    // 0xFFFE is WAVE_FORMAT_EXTENSIBLE; accept it when the payload is plain PCM-sized
    if (format != 1 && format != 0xFFFE)
        fail(Errc::unsupported_encoding, "only PCM WAV is supported: " + path.string());
    if (bits != 16 && bits != 24)
        fail(Errc::unsupported_encoding, "only 16/24-bit PCM is supported, got " +
                                             std::to_string(bits) + "-bit: " + path.string());
    if (data == nullptr || data_len == 0) fail(Errc::empty_audio, "no audio data: " + path.string());

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_bytes = bytes_per_sample * channels;
    const std::size_t frames = data_len / frame_bytes;
    if (frames == 0) fail(Errc::empty_audio, "no audio data: " + path.string());

    AudioClip clip;
    clip.sample_rate = static_cast<int>(sample_rate);
    clip.samples.resize(frames);
    const double inv_channels = 1.0 / channels;
    for (std::size_t t = 0; t < frames; ++t) {
        double acc = 0.0;
        const unsigned char* fp = data + t * frame_bytes;
        for (unsigned c = 0; c < channels; ++c) {
            const unsigned char* sp = fp + c * bytes_per_sample;
            if (bits == 16) {
                int16_t v = static_cast<int16_t>(sp[0] | (sp[1] << 8));
                acc += v / 32768.0;
            } else {
                int32_t v = sp[0] | (sp[1] << 8) | (sp[2] << 16);
                if (v & 0x800000) v |= ~0xFFFFFF; // sign-extend 24-bit
                acc += v / 8388608.0;
            }
        }
        clip.samples[t] = acc * inv_channels;
    }
    return clip;
}

/// Band-limited sample-rate conversion (windowed-sinc interpolation).
/// Output length is round(len * out_rate / in_rate).
inline std::vector<double> resample(const std::vector<double>& x, int rate_in, int rate_out) {
    if (rate_in <= 0 || rate_out <= 0) fail(Errc::bad_argument, "resample: invalid rates");
    if (rate_in == rate_out || x.empty()) return x;

    const auto out_len = static_cast<std::size_t>(
        std::llround(static_cast<double>(x.size()) * rate_out / rate_in));
    std::vector<double> y(out_len, 0.0);

    // cutoff relative to the input Nyquist; < 1 only when downsampling
    const double cutoff = std::min(1.0, static_cast<double>(rate_out) / rate_in);
    const double half_width = 32.0 / cutoff;
    const double step = static_cast<double>(rate_in) / rate_out;
    const long n = static_cast<long>(x.size());

    for (std::size_t j = 0; j < out_len; ++j) {
        const double p = j * step;
        long k0 = static_cast<long>(std::ceil(p - half_width));
        long k1 = static_cast<long>(std::floor(p + half_width));
        k0 = std::max(k0, 0L);
        k1 = std::min(k1, n - 1);
        double acc = 0.0;
        for (long k = k0; k <= k1; ++k) {
            const double u = (k - p) * cutoff;
            double kernel;
            if (std::abs(u) < 1e-12) {
                kernel = 1.0;
            } else {
                kernel = std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
            }
            const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * (k - p) / half_width));
            acc += x[static_cast<std::size_t>(k)] * kernel * w;
        }
        y[j] = acc * cutoff;
    }
    return y;
}

/// Decodes audio and applies the pipeline sampling contract: mono, [-1, 1],
/// resampled to 44100 Hz when the source rate differs.
inline AudioClip load_audio(const std::filesystem::path& path) {
    AudioClip clip = load_wav(path);
    if (clip.sample_rate != kPipelineSampleRate) {
        clip.samples = resample(clip.samples, clip.sample_rate, kPipelineSampleRate);
        clip.sample_rate = kPipelineSampleRate;
    }
    return clip;
}

/// Writes mono 16-bit PCM. Samples are clamped to [-1, 1].
inline void save_wav(const std::filesystem::path& path, const std::vector<double>& samples,
                     int sample_rate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io_failure, "cannot write file: " + path.string());

    auto put_u32 = [&](uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                              static_cast<unsigned char>((v >> 8) & 0xFF),
                              static_cast<unsigned char>((v >> 16) & 0xFF),
                              static_cast<unsigned char>((v >> 24) & 0xFF)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    auto put_u16 = [&](uint16_t v) {
        unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                              static_cast<unsigned char>((v >> 8) & 0xFF)};
        out.write(reinterpret_cast<char*>(b), 2);
    };

    const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
    out.write("RIFF", 4);
    put_u32(36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(16);
    put_u16(1); // PCM
    put_u16(1); // mono
    put_u32(static_cast<uint32_t>(sample_rate));
    put_u32(static_cast<uint32_t>(sample_rate) * 2);
    put_u16(2);
    put_u16(16);
    out.write("data", 4);
    put_u32(data_bytes);
    for (double s : samples) {
        double c = std::clamp(s, -1.0, 1.0);
        auto v = static_cast<int16_t>(std::lround(c * 32767.0));
        put_u16(static_cast<uint16_t>(v));
    }
    if (!out) fail(Errc::io_failure, "write failed: " + path.string());
}

} // namespace cnmft
