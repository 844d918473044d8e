#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "cnmft/audio.hpp"
#include "cnmft/matrix.hpp"

namespace cnmft {

enum class WindowKind : uint32_t { hann = 0 };

/// Analysis parameters. The defaults give 80 ms windows with a 20 ms hop at
/// 44100 Hz and 4097 frequency bins.
struct StftConfig {
    int window_length = 3528;
    int hop_length = 882;
    int fft_size = 8192;
    WindowKind window = WindowKind::hann;

    bool valid() const {
        return window_length > 0 && hop_length > 0 && fft_size > 0 &&
               hop_length <= window_length && window_length <= fft_size &&
               (fft_size & (fft_size - 1)) == 0;
    }

    bool operator==(const StftConfig&) const = default;
};

/// Amplitude spectrogram: one row per frequency bin, one column per frame.
struct Spectrogram {
    Matrix values; // n x m, entries >= 0
    double bin_hz = 0.0;
    double hop_seconds = 0.0;

    std::size_t bins() const { return values.rows(); }
    std::size_t frames() const { return values.cols(); }
};

/// Number of analysis frames for a signal of `len` samples: one frame per hop
/// position with start offset <= len; the tail of the final windows is
/// zero-padded. 30 s at the default config gives 1501 frames.
inline std::size_t stft_frame_count(std::size_t len, int hop_length) {
    return 1 + len / static_cast<std::size_t>(hop_length);
}

namespace detail {

inline std::vector<double> make_window(WindowKind kind, int length) {
    std::vector<double> w(static_cast<std::size_t>(length));
    switch (kind) {
    case WindowKind::hann:
        for (int k = 0; k < length; ++k)
            w[static_cast<std::size_t>(k)] =
                0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / length));
        break;
    }
    return w;
}

/// In-place iterative radix-2 FFT. Size must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

} // namespace detail

/// Amplitude STFT of a mono clip. Frame t covers samples
/// [t*hop, t*hop + window), zero-padded past the end of the signal, and maps
/// to time t*hop_seconds. No smoothing or log compression is applied.
inline Spectrogram compute_spectrogram(const AudioClip& clip, const StftConfig& cfg = {}) {
    if (!cfg.valid()) fail(Errc::bad_argument, "invalid STFT config");
    if (clip.samples.empty()) fail(Errc::empty_audio, "cannot analyze an empty clip");
    if (clip.samples.size() < static_cast<std::size_t>(cfg.hop_length))
        fail(Errc::clip_too_short, "clip shorter than one hop (" +
                                       std::to_string(clip.samples.size()) + " < " +
                                       std::to_string(cfg.hop_length) + " samples)");

    const std::size_t len = clip.samples.size();
    const std::size_t m = stft_frame_count(len, cfg.hop_length);
    const std::size_t n = static_cast<std::size_t>(cfg.fft_size) / 2 + 1;
    const auto window = detail::make_window(cfg.window, cfg.window_length);

    Spectrogram spec;
    spec.values = Matrix(n, m);
    spec.bin_hz = static_cast<double>(clip.sample_rate) / cfg.fft_size;
    spec.hop_seconds = static_cast<double>(cfg.hop_length) / clip.sample_rate;

    std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg.fft_size));
    for (std::size_t t = 0; t < m; ++t) {
        const std::size_t start = t * static_cast<std::size_t>(cfg.hop_length);
        for (int k = 0; k < cfg.window_length; ++k) {
            const std::size_t idx = start + static_cast<std::size_t>(k);
            const double s = idx < len ? clip.samples[idx] : 0.0;
            buf[static_cast<std::size_t>(k)] = s * window[static_cast<std::size_t>(k)];
        }
        for (int k = cfg.window_length; k < cfg.fft_size; ++k)
            buf[static_cast<std::size_t>(k)] = 0.0;
        detail::fft_radix2(buf);
        for (std::size_t f = 0; f < n; ++f) spec.values(f, t) = std::abs(buf[f]);
    }
    return spec;
}

/// CSV export, one row per frequency bin.
inline void write_spectrogram_csv(const Spectrogram& spec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(Errc::io_failure, "cannot write file: " + path.string());
    char header[128];
    std::snprintf(header, sizeof(header), "# n=%zu m=%zu bin_hz=%.17g hop_s=%.17g\n",
                  spec.bins(), spec.frames(), spec.bin_hz, spec.hop_seconds);
    out << header;
    char num[64];
    for (std::size_t f = 0; f < spec.bins(); ++f) {
        for (std::size_t t = 0; t < spec.frames(); ++t) {
            std::snprintf(num, sizeof(num), "%.17g", spec.values(f, t));
            if (t) out << ',';
            out << num;
        }
        out << '\n';
    }
    if (!out) fail(Errc::io_failure, "write failed: " + path.string());
}

} // namespace cnmft
