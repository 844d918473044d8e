#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cnmft/error.hpp"
#include "cnmft/events.hpp"
#include "cnmft/matrix.hpp"
#include "cnmft/transcriber.hpp"

namespace cnmft {

/// Note-wise counts and the derived ratios. A pair of notes can match when
/// pitches are equal and onsets lie within the tolerance; offsets and
/// velocities are ignored.
struct EvalReport {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    double accuracy = 0.0;

    static EvalReport from_counts(long tp, long fp, long fn) {
        EvalReport r;
        r.tp = tp;
        r.fp = fp;
        r.fn = fn;
        r.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        r.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        r.f_measure = r.precision + r.recall > 0.0
                          ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                          : 0.0;
        r.accuracy = tp + fp + fn > 0 ? static_cast<double>(tp) / (tp + fp + fn) : 0.0;
        return r;
    }
};

struct MatchResult {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    std::vector<std::pair<std::size_t, std::size_t>> matching; // (ref index, est index)
};

inline constexpr double kOnsetTolerance = 0.050; // seconds

/// Maximum bipartite matching between reference and estimated notes
/// (augmenting paths). Greedy matching would under-count clustered onsets.
inline MatchResult match_notes(const std::vector<NoteEvent>& ref,
                               const std::vector<NoteEvent>& est,
                               double tol = kOnsetTolerance) {
    if (!(tol > 0.0)) fail(Errc::bad_argument, "match_notes: tolerance must be positive");

    std::vector<std::vector<std::size_t>> adj(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
        for (std::size_t j = 0; j < est.size(); ++j)
            if (ref[i].pitch == est[j].pitch && std::abs(ref[i].onset - est[j].onset) <= tol)
                adj[i].push_back(j);

    std::vector<long> est_to_ref(est.size(), -1);
    std::vector<char> visited;
    auto try_augment = [&](auto&& self, std::size_t i) -> bool {
        for (std::size_t j : adj[i]) {
            if (visited[j]) continue;
            visited[j] = 1;
            if (est_to_ref[j] < 0 || self(self, static_cast<std::size_t>(est_to_ref[j]))) {
                est_to_ref[j] = static_cast<long>(i);
                return true;
            }
        }
        return false;
    };

    long matched = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        visited.assign(est.size(), 0);
        if (try_augment(try_augment, i)) ++matched;
    }

    MatchResult out;
    out.tp = matched;
    out.fp = static_cast<long>(est.size()) - matched;
    out.fn = static_cast<long>(ref.size()) - matched;
    for (std::size_t j = 0; j < est.size(); ++j)
        if (est_to_ref[j] >= 0)
            out.matching.emplace_back(static_cast<std::size_t>(est_to_ref[j]), j);
    std::sort(out.matching.begin(), out.matching.end());
    return out;
}

inline EvalReport score(const std::vector<NoteEvent>& ref, const std::vector<NoteEvent>& est,
                        double tol = kOnsetTolerance) {
    const MatchResult m = match_notes(ref, est, tol);
    return EvalReport::from_counts(m.tp, m.fp, m.fn);
}

/// Pools counts across songs (micro aggregate).
inline EvalReport pool_reports(const std::vector<EvalReport>& reports) {
    long tp = 0, fp = 0, fn = 0;
    for (const auto& r : reports) {
        tp += r.tp;
        fp += r.fp;
        fn += r.fn;
    }
    return EvalReport::from_counts(tp, fp, fn);
}

/// Averages per-song ratios (macro aggregate).
inline EvalReport mean_report(const std::vector<EvalReport>& reports) {
    EvalReport out;
    if (reports.empty()) return out;
    for (const auto& r : reports) {
        out.tp += r.tp;
        out.fp += r.fp;
        out.fn += r.fn;
        out.precision += r.precision;
        out.recall += r.recall;
        out.f_measure += r.f_measure;
        out.accuracy += r.accuracy;
    }
    const double inv = 1.0 / static_cast<double>(reports.size());
    out.precision *= inv;
    out.recall *= inv;
    out.f_measure *= inv;
    out.accuracy *= inv;
    return out;
}

/// The default threshold grid: 0.01, 0.02, ..., 0.40.
inline std::vector<double> default_delta_grid() {
    std::vector<double> grid;
    grid.reserve(40);
    for (int k = 1; k <= 40; ++k) grid.push_back(k / 100.0);
    return grid;
}

enum class SweepMode { global, per_song };

/// One song's inputs to a threshold sweep: precomputed activations plus the
/// settings needed to turn onset frames into events.
struct SweepSong {
    std::string name;
    Matrix activations; // r x m
    double hop_seconds = 0.02;
    int midi_base = 21;
};

struct ThresholdSweepResult {
    std::vector<double> grid;
    std::vector<std::vector<EvalReport>> reports; // [song][grid index]
    double best_global_delta = 0.0;
    std::size_t best_global_index = 0;
    std::vector<double> best_per_song_delta;
    std::vector<std::size_t> best_per_song_index;
    SweepMode mode = SweepMode::global;

    /// Mean F over songs at one grid point.
    double mean_f(std::size_t g) const {
        double s = 0.0;
        for (const auto& song : reports) s += song[g].f_measure;
        return reports.empty() ? 0.0 : s / static_cast<double>(reports.size());
    }
};

/// Re-runs peak picking and scoring over a threshold grid. Activations are
/// taken as given (the solve does not depend on delta). Global mode selects
/// the single delta with the best mean F across songs; per-song mode selects
/// each song's own argmax. Ties go to the smaller delta.
inline ThresholdSweepResult sweep_thresholds(const std::vector<SweepSong>& songs,
                                             const std::vector<std::vector<NoteEvent>>& refs,
                                             const std::vector<double>& grid, SweepMode mode,
                                             double tol = kOnsetTolerance, int half_window = 10) {
    if (songs.empty()) fail(Errc::bad_argument, "sweep_thresholds: no songs");
    if (songs.size() != refs.size())
        fail(Errc::bad_argument, "sweep_thresholds: songs/refs count mismatch");
    if (grid.empty()) fail(Errc::bad_argument, "sweep_thresholds: empty grid");

    ThresholdSweepResult out;
    out.grid = grid;
    out.mode = mode;
    out.reports.resize(songs.size());

    for (std::size_t s = 0; s < songs.size(); ++s) {
        const auto& song = songs[s];
        TemplateLibrary pitch_map; // only the pitch mapping is needed here
        pitch_map.tensor = TemplateTensor(1, 1, song.activations.rows());
        pitch_map.midi_base = static_cast<uint32_t>(song.midi_base);
        out.reports[s].reserve(grid.size());
        for (double delta : grid) {
            PeakPickConfig cfg;
            cfg.delta = delta;
            cfg.half_window = half_window;
            cfg.hop_seconds = song.hop_seconds;
            const auto onsets = pick_onsets(song.activations, cfg);
            const auto est = events_from_onsets(onsets, pitch_map, cfg);
            out.reports[s].push_back(score(refs[s], est, tol));
        }
    }

    out.best_global_index = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
        if (out.mean_f(g) > out.mean_f(out.best_global_index)) out.best_global_index = g;
    out.best_global_delta = grid[out.best_global_index];

    out.best_per_song_index.resize(songs.size(), 0);
    out.best_per_song_delta.resize(songs.size(), 0.0);
    for (std::size_t s = 0; s < songs.size(); ++s) {
        std::size_t best = 0;
        for (std::size_t g = 1; g < grid.size(); ++g)
            if (out.reports[s][g].f_measure > out.reports[s][best].f_measure) best = g;
        out.best_per_song_index[s] = best;
        out.best_per_song_delta[s] = grid[best];
    }
    return out;
}

/// Report CSV row: song, delta, P, R, F, A, tp, fp, fn.
inline void write_report_csv(const std::vector<std::string>& song_names,
                             const std::vector<double>& deltas,
                             const std::vector<EvalReport>& reports,
                             const std::filesystem::path& path) {
    if (song_names.size() != reports.size() || deltas.size() != reports.size())
        fail(Errc::bad_argument, "write_report_csv: size mismatch");
    std::ofstream out(path);
    if (!out) fail(Errc::io_failure, "cannot write file: " + path.string());
    out << "song,delta,precision,recall,f_measure,accuracy,tp,fp,fn\n";
    char line[256];
    for (std::size_t s = 0; s < reports.size(); ++s) {
        const auto& r = reports[s];
        if (std::isnan(deltas[s]))
            std::snprintf(line, sizeof(line), "%s,-,%.6f,%.6f,%.6f,%.6f,%ld,%ld,%ld\n",
                          song_names[s].c_str(), r.precision, r.recall, r.f_measure, r.accuracy,
                          r.tp, r.fp, r.fn);
        else
            std::snprintf(line, sizeof(line), "%s,%.2f,%.6f,%.6f,%.6f,%.6f,%ld,%ld,%ld\n",
                          song_names[s].c_str(), deltas[s], r.precision, r.recall, r.f_measure,
                          r.accuracy, r.tp, r.fp, r.fn);
        out << line;
    }
    if (!out) fail(Errc::io_failure, "write failed: " + path.string());
}

inline std::string format_report_row(const std::string& name, const std::string& delta,
                                     const EvalReport& r) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-28s %6s  P=%6.2f R=%6.2f F=%6.2f A=%6.2f  tp=%ld fp=%ld fn=%ld",
                  name.c_str(), delta.c_str(), 100.0 * r.precision, 100.0 * r.recall,
                  100.0 * r.f_measure, 100.0 * r.accuracy, r.tp, r.fp, r.fn);
    return line;
}

} // namespace cnmft
