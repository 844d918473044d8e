#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cnmft/events.hpp"
#include "cnmft/matrix.hpp"
#include "cnmft/template_store.hpp"

namespace cnmft {

/// Adaptive-threshold onset detector settings: a frame is an onset when the
/// activation exceeds its local mean over 2*half_window+1 frames by more
/// than delta.
struct PeakPickConfig {
    double delta = 0.05;
    int half_window = 10; // 21-frame mean by default
    double hop_seconds = 0.02;

    bool valid() const { return delta >= 0.0 && half_window >= 0 && hop_seconds > 0.0; }
};

/// Onset frames per note row. Frame t is reported for note q iff
///   H[q][t] > mean(H[q][t-hw .. t+hw]) + delta,
/// where the mean is zero-padded at the borders (the divisor stays
/// 2*hw+1 everywhere). No peak fusion or minimum gap is applied.
inline std::vector<std::vector<std::size_t>> pick_onsets(const Matrix& h,
                                                         const PeakPickConfig& cfg) {
    if (!cfg.valid()) fail(Errc::bad_argument, "pick_onsets: invalid config");
    require_nonnegative(h, "pick_onsets");

    const std::size_t r = h.rows();
    const std::size_t m = h.cols();
    const std::size_t hw = static_cast<std::size_t>(cfg.half_window);
    const double inv_win = 1.0 / (2.0 * cfg.half_window + 1.0);

    std::vector<std::vector<std::size_t>> onsets(r);
    std::vector<double> prefix(m + 1, 0.0);
    for (std::size_t q = 0; q < r; ++q) {
        auto row = h.row(q);
        for (std::size_t t = 0; t < m; ++t) prefix[t + 1] = prefix[t] + row[t];
        for (std::size_t t = 0; t < m; ++t) {
            const std::size_t lo = t > hw ? t - hw : 0;
            const std::size_t hi = std::min(m, t + hw + 1);
            const double mean = (prefix[hi] - prefix[lo]) * inv_win;
            if (row[t] > mean + cfg.delta) onsets[q].push_back(t);
        }
    }
    return onsets;
}

/// Converts onset frames to note events. Onset time is frame * hop_seconds;
/// duration is 0.5 s truncated to the gap to the next onset of the same
/// pitch (offsets are not estimated); velocity is fixed.
inline std::vector<NoteEvent> events_from_onsets(const std::vector<std::vector<std::size_t>>& onsets,
                                                 const TemplateLibrary& lib,
                                                 const PeakPickConfig& cfg) {
    constexpr double kMaxDuration = 0.5;
    constexpr int kVelocity = 80;

    std::vector<NoteEvent> events;
    for (std::size_t q = 0; q < onsets.size(); ++q) {
        const int pitch = pitch_of(q, lib);
        const auto& frames = onsets[q];
        for (std::size_t k = 0; k < frames.size(); ++k) {
            NoteEvent e;
            e.pitch = pitch;
            e.onset = static_cast<double>(frames[k]) * cfg.hop_seconds;
            double dur = kMaxDuration;
            if (k + 1 < frames.size())
                dur = std::min(dur, static_cast<double>(frames[k + 1] - frames[k]) * cfg.hop_seconds);
            e.duration = dur;
            e.velocity = kVelocity;
            events.push_back(e);
        }
    }
    sort_events(events);
    return events;
}

/// Activation CSV: header line `# r=<r> m=<m> hop_s=<v> midi_base=<b>`, then
/// one comma-separated row per note.
inline void write_activation_csv(const Matrix& h, double hop_seconds, int midi_base,
                                 const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(Errc::io_failure, "cannot write file: " + path.string());
    char header[128];
    std::snprintf(header, sizeof(header), "# r=%zu m=%zu hop_s=%.17g midi_base=%d\n", h.rows(),
                  h.cols(), hop_seconds, midi_base);
    out << header;
    char num[64];
    for (std::size_t q = 0; q < h.rows(); ++q) {
        auto row = h.row(q);
        for (std::size_t t = 0; t < h.cols(); ++t) {
            std::snprintf(num, sizeof(num), "%.17g", row[t]);
            if (t) out << ',';
            out << num;
        }
        out << '\n';
    }
    if (!out) fail(Errc::io_failure, "write failed: " + path.string());
}

struct ActivationCsv {
    Matrix values;
    double hop_seconds = 0.0;
    int midi_base = 0;
};

inline ActivationCsv read_activation_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::file_unreadable, "cannot open file: " + path.string());
    std::string header;
    std::getline(in, header);
    std::size_t r = 0, m = 0;
    double hop_s = 0.0;
    int midi_base = 0;
    if (std::sscanf(header.c_str(), "# r=%zu m=%zu hop_s=%lg midi_base=%d", &r, &m, &hop_s,
                    &midi_base) != 4)
        fail(Errc::bad_format, "bad activation CSV header: " + path.string());
    ActivationCsv out;
    out.values = Matrix(r, m);
    out.hop_seconds = hop_s;
    out.midi_base = midi_base;
    std::string line;
    for (std::size_t q = 0; q < r; ++q) {
        if (!std::getline(in, line))
            fail(Errc::truncated_file, "activation CSV ends early: " + path.string());
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t t = 0; t < m; ++t) {
            if (!std::getline(ss, cell, ','))
                fail(Errc::bad_format, "short activation CSV row: " + path.string());
            out.values(q, t) = std::stod(cell);
        }
    }
    return out;
}

} // namespace cnmft
