#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cnmft/cnmf.hpp"
#include "cnmft/stft.hpp"

namespace cnmft {

/// A trained template dictionary plus the analysis settings it was built
/// with. Transcription refuses to run against a differently configured
/// spectrogram, so templates and data always share one STFT protocol.
struct TemplateLibrary {
    TemplateTensor tensor;
    uint32_t midi_base = 21; // template q maps to MIDI pitch midi_base + q
    uint32_t sample_rate = 44100;
    StftConfig stft;
    std::vector<std::string> metadata; // free-form provenance labels
};

inline int pitch_of(std::size_t q, const TemplateLibrary& lib) {
    if (q >= lib.tensor.r)
        fail(Errc::out_of_range, "template index " + std::to_string(q) + " out of range (r=" +
                                     std::to_string(lib.tensor.r) + ")");
    return static_cast<int>(lib.midi_base + q);
}

/// Throws unless the library was trained under exactly this STFT protocol.
inline void require_stft_match(const TemplateLibrary& lib, const StftConfig& cfg,
                               int sample_rate) {
    if (lib.stft == cfg && lib.sample_rate == static_cast<uint32_t>(sample_rate)) return;
    fail(Errc::config_mismatch,
         "library STFT settings (rate=" + std::to_string(lib.sample_rate) +
             " win=" + std::to_string(lib.stft.window_length) +
             " hop=" + std::to_string(lib.stft.hop_length) +
             " fft=" + std::to_string(lib.stft.fft_size) +
             ") do not match the requested analysis (rate=" + std::to_string(sample_rate) +
             " win=" + std::to_string(cfg.window_length) + " hop=" +
             std::to_string(cfg.hop_length) + " fft=" + std::to_string(cfg.fft_size) + ")");
}

namespace detail {

inline constexpr char kLibraryMagic[8] = {'C', 'N', 'M', 'F', 'T', 'P', 'L', '1'};
inline constexpr std::size_t kHeaderBytes = 64;

inline void put_u32le(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline uint32_t get_u32le(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline uint64_t get_u64le(const unsigned char* p) {
    uint64_t v = 0;
    for (int k = 7; k >= 0; --k) v = (v << 8) | p[k];
    return v;
}

} // namespace detail

/// Serializes a library. Layout (little-endian): 8-byte magic "CNMFTPL1",
/// then u32 fields version, n, tau, r, midi_base, sample_rate, window_length,
/// hop_length, fft_size, window_tag, and reserved zeros padding the header to
/// 64 bytes; then n*tau*r float64 values ordered note-major, then shift, then
/// frequency; then, when present, a metadata block of u32 string count
/// followed by length-prefixed UTF-8 strings.
inline void save_library(const TemplateLibrary& lib, const std::filesystem::path& path) {
    const auto& w = lib.tensor;
    if (w.n == 0 || w.tau == 0 || w.r == 0)
        fail(Errc::bad_argument, "save_library: empty tensor");
    detail::require_tensor_nonnegative(w, "save_library");

    std::string header;
    header.reserve(detail::kHeaderBytes);
    header.append(detail::kLibraryMagic, 8);
    detail::put_u32le(header, 1); // version
    detail::put_u32le(header, static_cast<uint32_t>(w.n));
    detail::put_u32le(header, static_cast<uint32_t>(w.tau));
    detail::put_u32le(header, static_cast<uint32_t>(w.r));
    detail::put_u32le(header, lib.midi_base);
    detail::put_u32le(header, lib.sample_rate);
    detail::put_u32le(header, static_cast<uint32_t>(lib.stft.window_length));
    detail::put_u32le(header, static_cast<uint32_t>(lib.stft.hop_length));
    detail::put_u32le(header, static_cast<uint32_t>(lib.stft.fft_size));
    detail::put_u32le(header, static_cast<uint32_t>(lib.stft.window));
    while (header.size() < detail::kHeaderBytes) header.push_back('\0');

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io_failure, "cannot write file: " + path.string());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(w.values.data()),
                  static_cast<std::streamsize>(w.values.size() * sizeof(double)));
    } else {
        for (double v : w.values) {
            uint64_t bits = std::bit_cast<uint64_t>(v);
            char b[8];
            for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xFF);
            out.write(b, 8);
        }
    }

    if (!lib.metadata.empty()) {
        std::string meta;
        detail::put_u32le(meta, static_cast<uint32_t>(lib.metadata.size()));
        for (const auto& s : lib.metadata) {
            detail::put_u32le(meta, static_cast<uint32_t>(s.size()));
            meta.append(s);
        }
        out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    }
    if (!out) fail(Errc::io_failure, "write failed: " + path.string());
}

inline TemplateLibrary load_library(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    if (bytes.size() < 8 || std::memcmp(bytes.data(), detail::kLibraryMagic, 8) != 0)
        fail(Errc::bad_format, "not a template library: " + path.string());
    if (bytes.size() < detail::kHeaderBytes)
        fail(Errc::truncated_file, "truncated header: expected at least " +
                                       std::to_string(detail::kHeaderBytes) + " bytes, got " +
                                       std::to_string(bytes.size()));

    const unsigned char* p = bytes.data() + 8;
    const uint32_t version = detail::get_u32le(p);
    if (version != 1)
        fail(Errc::version_mismatch,
             "unsupported library version " + std::to_string(version) + " (supported: 1)");
    const uint32_t n = detail::get_u32le(p + 4);
    const uint32_t tau = detail::get_u32le(p + 8);
    const uint32_t r = detail::get_u32le(p + 12);
    if (n == 0 || tau == 0 || r == 0) fail(Errc::bad_format, "degenerate tensor dimensions");

    TemplateLibrary lib;
    lib.midi_base = detail::get_u32le(p + 16);
    lib.sample_rate = detail::get_u32le(p + 20);
    lib.stft.window_length = static_cast<int>(detail::get_u32le(p + 24));
    lib.stft.hop_length = static_cast<int>(detail::get_u32le(p + 28));
    lib.stft.fft_size = static_cast<int>(detail::get_u32le(p + 32));
    const uint32_t window_tag = detail::get_u32le(p + 36);
    if (window_tag != 0) fail(Errc::bad_format, "unknown window tag " + std::to_string(window_tag));
    lib.stft.window = WindowKind::hann;

    const std::size_t count = static_cast<std::size_t>(n) * tau * r;
    const std::size_t payload_end = detail::kHeaderBytes + count * 8;
    if (bytes.size() < payload_end)
        fail(Errc::truncated_file, "truncated payload: expected " + std::to_string(payload_end) +
                                       " bytes, got " + std::to_string(bytes.size()));

    lib.tensor = TemplateTensor(n, tau, r);
    const unsigned char* vp = bytes.data() + detail::kHeaderBytes;
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(lib.tensor.values.data(), vp, count * 8);
    } else {
        for (std::size_t k = 0; k < count; ++k)
            lib.tensor.values[k] = std::bit_cast<double>(detail::get_u64le(vp + k * 8));
    }
    detail::require_tensor_nonnegative(lib.tensor, "load_library");

    std::size_t pos = payload_end;
    if (pos < bytes.size()) {
        if (pos + 4 > bytes.size()) fail(Errc::truncated_file, "truncated metadata block");
        const uint32_t meta_count = detail::get_u32le(bytes.data() + pos);
        pos += 4;
        lib.metadata.reserve(meta_count);
        for (uint32_t k = 0; k < meta_count; ++k) {
            if (pos + 4 > bytes.size()) fail(Errc::truncated_file, "truncated metadata block");
            const uint32_t len = detail::get_u32le(bytes.data() + pos);
            pos += 4;
            if (pos + len > bytes.size()) fail(Errc::truncated_file, "truncated metadata string");
            lib.metadata.emplace_back(reinterpret_cast<const char*>(bytes.data() + pos), len);
            pos += len;
        }
    }
    return lib;
}

} // namespace cnmft
