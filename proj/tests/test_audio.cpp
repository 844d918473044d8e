#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "cnmft/audio.hpp"
#include "cnmft/stft.hpp"

#include "test_util.hpp"

using namespace cnmft;

namespace {

// WAV bytes built by hand, independent of save_wav. channels[c][t] in [-1,1].
std::vector<unsigned char> build_wav(const std::vector<std::vector<double>>& channels, int rate,
                                     int bits, uint16_t format_code = 1) {
    const std::size_t nch = channels.size();
    const std::size_t frames = nch ? channels[0].size() : 0;
    const std::size_t bytes_per = static_cast<std::size_t>(bits) / 8;
    const std::size_t data_len = frames * nch * bytes_per;

    std::vector<unsigned char> out;
    auto u32 = [&](uint32_t v) {
        for (int k = 0; k < 4; ++k) out.push_back((v >> (8 * k)) & 0xFF);
    };
    auto u16 = [&](uint16_t v) {
        out.push_back(v & 0xFF);
        out.push_back((v >> 8) & 0xFF);
    };
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    u32(static_cast<uint32_t>(36 + data_len));
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    u32(16);
    u16(format_code);
    u16(static_cast<uint16_t>(nch));
    u32(static_cast<uint32_t>(rate));
    u32(static_cast<uint32_t>(rate * nch * bytes_per));
    u16(static_cast<uint16_t>(nch * bytes_per));
    u16(static_cast<uint16_t>(bits));
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    u32(static_cast<uint32_t>(data_len));
    for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t c = 0; c < nch; ++c) {
            if (bits == 16) {
                auto v = static_cast<int16_t>(std::lround(channels[c][t] * 32767.0));
                u16(static_cast<uint16_t>(v));
            } else {
                auto v = static_cast<int32_t>(std::lround(channels[c][t] * 8388607.0));
                out.push_back(v & 0xFF);
                out.push_back((v >> 8) & 0xFF);
                out.push_back((v >> 16) & 0xFF);
            }
        }
    return out;
}

std::filesystem::path write_bytes(const std::filesystem::path& dir, const std::string& name,
                                  const std::vector<unsigned char>& bytes) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    return path;
}

std::vector<double> sine(double hz, double seconds, int rate, double amp = 0.5) {
    std::vector<double> x(static_cast<std::size_t>(seconds * rate));
    for (std::size_t t = 0; t < x.size(); ++t)
        x[t] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(t) / rate);
    return x;
}

} // namespace

TEST_CASE("one second of 16-bit silence decodes to 44100 zero samples", "[audio]") {
    TempDir tmp;
    const std::vector<std::vector<double>> ch = {std::vector<double>(44100, 0.0)};
    const auto path = write_bytes(tmp.path, "silence.wav", build_wav(ch, 44100, 16));
    const AudioClip clip = load_audio(path);
    REQUIRE(clip.sample_rate == 44100);
    REQUIRE(clip.samples.size() == 44100);
    for (double s : clip.samples) REQUIRE(s == 0.0);
}

TEST_CASE("opposite stereo channels cancel to an all-zero mono clip", "[audio]") {
    TempDir tmp;
    auto x = sine(440.0, 0.2, 44100);
    auto neg = x;
    for (double& v : neg) v = -v;
    const auto path = write_bytes(tmp.path, "cancel.wav", build_wav({x, neg}, 44100, 16));
    const AudioClip clip = load_audio(path);
    REQUIRE(clip.samples.size() == x.size());
    for (double s : clip.samples) REQUIRE(std::abs(s) < 1e-12);
}

TEST_CASE("a 2 s file at 22050 Hz resamples to 88200 samples", "[audio]") {
    TempDir tmp;
    const auto x = sine(1000.0, 2.0, 22050);
    const auto path = write_bytes(tmp.path, "slow.wav", build_wav({x}, 22050, 16));
    const AudioClip clip = load_audio(path);
    REQUIRE(clip.sample_rate == 44100);
    REQUIRE(clip.samples.size() == 88200);
    // interior samples should track the analytic sine closely
    for (std::size_t t = 2000; t < 86000; t += 997) {
        const double want = 0.5 * std::sin(2.0 * std::numbers::pi * 1000.0 * t / 44100.0);
        REQUIRE(std::abs(clip.samples[t] - want) < 5e-3);
    }
}

TEST_CASE("24-bit samples scale to [-1,1]", "[audio]") {
    TempDir tmp;
    const std::vector<std::vector<double>> ch = {{0.0, 0.5, -0.5, 0.999}};
    const auto path = write_bytes(tmp.path, "deep.wav", build_wav(ch, 44100, 24));
    const AudioClip clip = load_wav(path);
    REQUIRE(clip.samples.size() == 4);
    REQUIRE(std::abs(clip.samples[0]) < 1e-6);
    REQUIRE(std::abs(clip.samples[1] - 0.5) < 1e-6);
    REQUIRE(std::abs(clip.samples[2] + 0.5) < 1e-6);
    REQUIRE(std::abs(clip.samples[3] - 0.999) < 1e-6);
}

TEST_CASE("decode failures are distinct error values", "[audio]") {
    TempDir tmp;
    SECTION("unreadable file") {
        REQUIRE_THROWS_MATCHES(load_audio(tmp.path / "absent.wav"), Error,
                               HasCode(Errc::file_unreadable));
    }
    SECTION("float format rejected") {
        const auto path =
            write_bytes(tmp.path, "float.wav", build_wav({{0.0, 0.1}}, 44100, 16, /*format=*/3));
        REQUIRE_THROWS_MATCHES(load_audio(path), Error, HasCode(Errc::unsupported_encoding));
    }
    SECTION("empty data chunk") {
        const auto path = write_bytes(tmp.path, "empty.wav", build_wav({{}}, 44100, 16));
        REQUIRE_THROWS_MATCHES(load_audio(path), Error, HasCode(Errc::empty_audio));
    }
    SECTION("not a RIFF file") {
        const auto path = write_bytes(tmp.path, "junk.wav", {'j', 'u', 'n', 'k', 0, 0, 0, 0});
        REQUIRE_THROWS_MATCHES(load_audio(path), Error, HasCode(Errc::bad_format));
    }
}

TEST_CASE("save_wav round-trips through the decoder", "[audio]") {
    TempDir tmp;
    const auto x = sine(220.0, 0.1, 44100, 0.8);
    const auto path = tmp.path / "out.wav";
    save_wav(path, x, 44100);
    const AudioClip clip = load_wav(path);
    REQUIRE(clip.samples.size() == x.size());
    for (std::size_t t = 0; t < x.size(); ++t)
        REQUIRE(std::abs(clip.samples[t] - x[t]) < 1.0 / 32000.0);
}

TEST_CASE("30 s at 44100 Hz gives 4097 bins and 1501 frames", "[audio]") {
    AudioClip clip;
    clip.sample_rate = 44100;
    clip.samples = sine(440.0, 30.0, 44100);
    const Spectrogram spec = compute_spectrogram(clip);
    REQUIRE(spec.bins() == 4097);
    REQUIRE(spec.frames() == 1501);
    REQUIRE(spec.hop_seconds == Catch::Approx(0.02));
    REQUIRE(spec.bin_hz == Catch::Approx(44100.0 / 8192.0));
}

TEST_CASE("an all-zero clip yields an all-zero spectrogram", "[audio]") {
    AudioClip clip;
    clip.sample_rate = 44100;
    clip.samples.assign(44100, 0.0);
    const Spectrogram spec = compute_spectrogram(clip);
    for (double v : spec.values.data()) REQUIRE(v == 0.0);
}

TEST_CASE("a pure 440 Hz tone peaks at the expected bin on interior frames", "[audio]") {
    AudioClip clip;
    clip.sample_rate = 44100;
    clip.samples = sine(440.0, 2.0, 44100);
    const StftConfig cfg;
    const Spectrogram spec = compute_spectrogram(clip, cfg);
    const auto want_bin = static_cast<std::size_t>(std::lround(440.0 / spec.bin_hz));

    // frames whose window lies fully inside the signal
    const std::size_t full_frames =
        (clip.samples.size() - static_cast<std::size_t>(cfg.window_length)) /
        static_cast<std::size_t>(cfg.hop_length);
    for (std::size_t t = 0; t <= full_frames; t += 7) {
        std::size_t argmax = 0;
        for (std::size_t f = 1; f < spec.bins(); ++f)
            if (spec.values(f, t) > spec.values(argmax, t)) argmax = f;
        REQUIRE(argmax == want_bin);
    }
}

TEST_CASE("spectrogram matches a direct DFT of one windowed frame", "[audio]") {
    AudioClip clip;
    clip.sample_rate = 44100;
    clip.samples = sine(440.0, 0.3, 44100);
    StftConfig cfg;
    cfg.window_length = 256;
    cfg.hop_length = 64;
    cfg.fft_size = 512;
    const Spectrogram spec = compute_spectrogram(clip, cfg);

    const std::size_t frame = 5;
    std::vector<double> w(static_cast<std::size_t>(cfg.window_length));
    for (int k = 0; k < cfg.window_length; ++k)
        w[static_cast<std::size_t>(k)] =
            0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / cfg.window_length)) *
            clip.samples[frame * static_cast<std::size_t>(cfg.hop_length) +
                         static_cast<std::size_t>(k)];
    for (std::size_t f = 0; f < spec.bins(); f += 13) {
        double re = 0.0, im = 0.0;
        for (int k = 0; k < cfg.window_length; ++k) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(f) * k / cfg.fft_size;
            re += w[static_cast<std::size_t>(k)] * std::cos(ang);
            im += w[static_cast<std::size_t>(k)] * std::sin(ang);
        }
        REQUIRE(spec.values(f, frame) == Catch::Approx(std::hypot(re, im)).margin(1e-9));
    }
}

TEST_CASE("doubling the input doubles every spectrogram entry", "[audio]") {
    Rng rng(11);
    AudioClip clip;
    clip.sample_rate = 44100;
    clip.samples.resize(9000);
    for (auto& s : clip.samples) s = rng.uniform(-0.4, 0.4);
    AudioClip twice = clip;
    for (auto& s : twice.samples) s *= 2.0;

    StftConfig cfg;
    cfg.window_length = 512;
    cfg.hop_length = 128;
    cfg.fft_size = 512;
    const Spectrogram a = compute_spectrogram(clip, cfg);
    const Spectrogram b = compute_spectrogram(twice, cfg);
    for (std::size_t k = 0; k < a.values.size(); ++k)
        REQUIRE(b.values.data()[k] == Catch::Approx(2.0 * a.values.data()[k]).margin(1e-12));
}

TEST_CASE("dimension law holds for random lengths", "[audio]") {
    Rng rng(22);
    StftConfig cfg;
    cfg.window_length = 64;
    cfg.hop_length = 16;
    cfg.fft_size = 128;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t len = 16 + rng.index(5000);
        AudioClip clip;
        clip.sample_rate = 8000;
        clip.samples.assign(len, 0.25);
        const Spectrogram spec = compute_spectrogram(clip, cfg);
        REQUIRE(spec.bins() == static_cast<std::size_t>(cfg.fft_size) / 2 + 1);
        REQUIRE(spec.frames() == 1 + len / static_cast<std::size_t>(cfg.hop_length));
        for (double v : spec.values.data()) REQUIRE(v >= 0.0);
    }
}

TEST_CASE("clips shorter than one hop are rejected", "[audio]") {
    AudioClip clip;
    clip.sample_rate = 44100;
    clip.samples.assign(100, 0.1); // < 882
    REQUIRE_THROWS_MATCHES(compute_spectrogram(clip), Error, HasCode(Errc::clip_too_short));
    clip.samples.clear();
    REQUIRE_THROWS_MATCHES(compute_spectrogram(clip), Error, HasCode(Errc::empty_audio));
}

TEST_CASE("spectrogram CSV export carries the header and one row per bin", "[audio]") {
    TempDir tmp;
    AudioClip clip;
    clip.sample_rate = 8000;
    clip.samples = sine(500.0, 0.1, 8000);
    StftConfig cfg;
    cfg.window_length = 64;
    cfg.hop_length = 32;
    cfg.fft_size = 64;
    const Spectrogram spec = compute_spectrogram(clip, cfg);
    const auto path = tmp.path / "spec.csv";
    write_spectrogram_csv(spec, path);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header.rfind("# n=33 m=", 0) == 0);
    REQUIRE(header.find("bin_hz=") != std::string::npos);
    REQUIRE(header.find("hop_s=") != std::string::npos);
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    REQUIRE(rows == spec.bins());
}
