#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cnmft/audio.hpp"
#include "cnmft/cnmf.hpp"
#include "cnmft/evaluate.hpp"
#include "cnmft/midi.hpp"
#include "cnmft/parallel.hpp"
#include "cnmft/selfcheck.hpp"
#include "cnmft/stft.hpp"
#include "cnmft/template_store.hpp"
#include "cnmft/transcriber.hpp"
#include "cnmft/version.hpp"

namespace cnmft::cli {

namespace detail {

class PhaseTimer {
public:
    void start() { mark_ = std::chrono::steady_clock::now(); }
    double stop(const std::string& phase) {
        const double s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - mark_).count();
        phases_.emplace_back(phase, s);
        return s;
    }
    const std::vector<std::pair<std::string, double>>& phases() const { return phases_; }

private:
    std::chrono::steady_clock::time_point mark_;
    std::vector<std::pair<std::string, double>> phases_;
};

inline nlohmann::ordered_json timings_json(const PhaseTimer& timer) {
    nlohmann::ordered_json j;
    for (const auto& [name, seconds] : timer.phases()) j[name] = seconds;
    return j;
}

inline void write_manifest(const std::filesystem::path& path, nlohmann::ordered_json manifest) {
    manifest["toolkit"] = "cnmft";
    manifest["version"] = kVersion;
    std::ofstream out(path);
    if (!out) fail(Errc::io_failure, "cannot write manifest: " + path.string());
    out << manifest.dump(2) << '\n';
}

/// Default naming: `<midi>_anything.wav` or `<midi>.wav`.
inline std::optional<int> parse_pitch_default(const std::string& stem) {
    std::size_t k = 0;
    while (k < stem.size() && stem[k] >= '0' && stem[k] <= '9') ++k;
    if (k == 0) return std::nullopt;
    if (k < stem.size() && stem[k] != '_') return std::nullopt;
    return std::stoi(stem.substr(0, k));
}

/// MAPS isolated-note naming: MAPS_ISOL_NO_<loudness>_S<s>_M<midi>_<piano>.
/// Only ISOL/NO files at the requested loudness are accepted.
inline std::optional<int> parse_pitch_maps(const std::string& stem, const std::string& intensity) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start <= stem.size()) {
        const std::size_t pos = stem.find('_', start);
        if (pos == std::string::npos) {
            tokens.push_back(stem.substr(start));
            break;
        }
        tokens.push_back(stem.substr(start, pos - start));
        start = pos + 1;
    }
    std::optional<int> pitch;
    bool isol = false, normal = false, loudness_ok = false;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
        const auto& tok = tokens[k];
        if (tok == "ISOL") {
            isol = true;
            if (k + 1 < tokens.size() && tokens[k + 1] == "NO") normal = true;
            if (k + 2 < tokens.size() && tokens[k + 2] == intensity) loudness_ok = true;
        }
        if (tok.size() >= 2 && tok[0] == 'M' &&
            std::all_of(tok.begin() + 1, tok.end(), [](char c) { return c >= '0' && c <= '9'; }))
            pitch = std::stoi(tok.substr(1));
    }
    if (isol && normal && loudness_ok && pitch) return pitch;
    return std::nullopt;
}

struct NoteFile {
    int pitch;
    std::filesystem::path path;
};

inline std::vector<NoteFile> scan_note_dir(const std::filesystem::path& dir, bool maps_names,
                                           const std::string& intensity) {
    if (!std::filesystem::is_directory(dir))
        fail(Errc::file_unreadable, "not a directory: " + dir.string());
    std::map<int, std::vector<std::filesystem::path>> by_pitch;
    std::vector<std::filesystem::path> entries;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".wav")
            entries.push_back(entry.path());
    std::sort(entries.begin(), entries.end());
    for (const auto& p : entries) {
        const std::string stem = p.stem().string();
        const auto pitch =
            maps_names ? parse_pitch_maps(stem, intensity) : parse_pitch_default(stem);
        if (pitch) by_pitch[*pitch].push_back(p);
    }
    if (by_pitch.empty()) fail(Errc::missing_note, "no note files found in " + dir.string());

    std::string duplicates;
    for (const auto& [pitch, files] : by_pitch)
        if (files.size() > 1) {
            duplicates += (duplicates.empty() ? "" : "; ") + std::string("MIDI ") +
                          std::to_string(pitch) + " (";
            for (std::size_t k = 0; k < files.size(); ++k)
                duplicates += (k ? ", " : "") + files[k].filename().string();
            duplicates += ")";
        }
    if (!duplicates.empty()) fail(Errc::duplicate_note, "duplicate note files: " + duplicates);

    const int lo = by_pitch.begin()->first;
    const int hi = by_pitch.rbegin()->first;
    std::string missing;
    for (int p = lo; p <= hi; ++p)
        if (!by_pitch.count(p))
            missing += (missing.empty() ? "" : "; ") + std::string("missing template for MIDI ") +
                       std::to_string(p);
    if (!missing.empty()) fail(Errc::missing_note, missing);

    std::vector<NoteFile> out;
    out.reserve(by_pitch.size());
    for (const auto& [pitch, files] : by_pitch) out.push_back({pitch, files.front()});
    return out;
}

/// Directory listing by extension, sorted, keyed by stem.
inline std::map<std::string, std::filesystem::path> scan_by_stem(const std::filesystem::path& dir,
                                                                 const std::string& ext) {
    if (!std::filesystem::is_directory(dir))
        fail(Errc::file_unreadable, "not a directory: " + dir.string());
    std::map<std::string, std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ext)
            out[entry.path().stem().string()] = entry.path();
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------

struct TrainOptions {
    std::string notes_dir;
    std::string out_path;
    int tau = 10;
    int iters = 500;
    int jobs = 0;
    bool maps_names = false;
    std::string intensity = "M";
    std::string manifest_path; // default <out>.manifest.json
};

inline void run_train(const TrainOptions& opt) {
    if (opt.tau < 1) fail(Errc::bad_argument, "tau must be >= 1");
    if (opt.iters < 1) fail(Errc::bad_argument, "iters must be >= 1");
    detail::PhaseTimer timer;

    timer.start();
    const auto notes = detail::scan_note_dir(opt.notes_dir, opt.maps_names, opt.intensity);
    timer.stop("scan");

    const StftConfig stft;
    const auto tau = static_cast<std::size_t>(opt.tau);

    struct NoteResult {
        TemplateTensor tpl;
        double final_cost = 0.0;
        int iterations = 0;
        double seconds = 0.0;
    };
    std::vector<NoteResult> results(notes.size());

    timer.start();
    parallel_for(notes.size(), opt.jobs, [&](std::size_t k) {
        const auto start = std::chrono::steady_clock::now();
        try {
            const AudioClip clip = load_audio(notes[k].path);
            const Spectrogram spec = compute_spectrogram(clip, stft);
            SolverConfig solver;
            solver.max_iters = opt.iters;
            auto [tpl, trace] = train_note_template(spec.values, tau, solver);
            results[k].tpl = std::move(tpl);
            results[k].final_cost = trace.cost_per_iteration.back();
            results[k].iterations = trace.iterations_run;
        } catch (const Error& e) {
            throw Error(e.code(),
                        notes[k].path.filename().string() + " (MIDI " +
                            std::to_string(notes[k].pitch) + "): " + e.what());
        }
        results[k].seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    const double train_seconds = timer.stop("train");

    TemplateLibrary lib;
    lib.midi_base = static_cast<uint32_t>(notes.front().pitch);
    lib.sample_rate = kPipelineSampleRate;
    lib.stft = stft;
    lib.tensor = TemplateTensor(results.front().tpl.n, tau, notes.size());
    for (std::size_t q = 0; q < notes.size(); ++q)
        for (std::size_t i = 0; i < tau; ++i) {
            auto dst = lib.tensor.slice(q, i);
            auto src = results[q].tpl.slice(0, i);
            std::copy(src.begin(), src.end(), dst.begin());
        }
    lib.metadata.push_back("tau=" + std::to_string(opt.tau) +
                           " iters=" + std::to_string(opt.iters));
    for (std::size_t q = 0; q < notes.size(); ++q)
        lib.metadata.push_back("M" + std::to_string(notes[q].pitch) + " <- " +
                               notes[q].path.filename().string());

    timer.start();
    save_library(lib, opt.out_path);
    timer.stop("save");

    std::printf("trained %zu templates (tau=%d, iters=%d)\n", notes.size(), opt.tau, opt.iters);
    for (std::size_t q = 0; q < notes.size(); ++q)
        std::printf("  MIDI %3d  final KL %.6g  iters %3d  %.2fs  %s\n", notes[q].pitch,
                    results[q].final_cost, results[q].iterations, results[q].seconds,
                    notes[q].path.filename().string().c_str());
    std::printf("library written to %s (%.2fs training)\n", opt.out_path.c_str(), train_seconds);

    nlohmann::ordered_json manifest;
    manifest["command"] = "train";
    manifest["parameters"] = {{"tau", opt.tau},
                              {"iters", opt.iters},
                              {"jobs", resolve_job_count(opt.jobs)},
                              {"maps_names", opt.maps_names},
                              {"intensity", opt.intensity},
                              {"sample_rate", kPipelineSampleRate},
                              {"window_length", stft.window_length},
                              {"hop_length", stft.hop_length},
                              {"fft_size", stft.fft_size},
                              {"window", "hann"}};
    manifest["inputs"] = {{"notes_dir", opt.notes_dir}, {"note_count", notes.size()}};
    nlohmann::ordered_json costs = nlohmann::ordered_json::array();
    for (std::size_t q = 0; q < results.size(); ++q)
        costs.push_back({{"midi", notes[q].pitch},
                         {"final_kl", results[q].final_cost},
                         {"iterations", results[q].iterations},
                         {"seconds", results[q].seconds}});
    manifest["per_note"] = costs;
    manifest["outputs"] = {{"library", opt.out_path}};
    manifest["timings_seconds"] = detail::timings_json(timer);
    const std::string mpath =
        opt.manifest_path.empty() ? opt.out_path + ".manifest.json" : opt.manifest_path;
    detail::write_manifest(mpath, std::move(manifest));
}

// ---------------------------------------------------------------------------

struct TranscribeOptions {
    std::string in_wav;
    std::string lib_path;
    std::string out_midi;
    std::string csv_path;      // optional activation export
    std::string spec_csv_path; // optional spectrogram export
    double delta = 0.05;
    int iters = 100;
    std::string manifest_path; // default <out>.manifest.json
};

inline void run_transcribe(const TranscribeOptions& opt) {
    if (opt.delta < 0.0) fail(Errc::bad_argument, "delta must be >= 0");
    if (opt.iters < 1) fail(Errc::bad_argument, "iters must be >= 1");
    detail::PhaseTimer timer;

    timer.start();
    const TemplateLibrary lib = load_library(opt.lib_path);
    // load_audio resamples to the pipeline rate; a library trained elsewhere
    // must match it, and the analysis below reuses the library's own STFT.
    require_stft_match(lib, lib.stft, kPipelineSampleRate);
    const AudioClip clip = load_audio(opt.in_wav);
    timer.stop("load");

    timer.start();
    const Spectrogram spec = compute_spectrogram(clip, lib.stft);
    timer.stop("stft");
    if (!opt.spec_csv_path.empty()) write_spectrogram_csv(spec, opt.spec_csv_path);

    timer.start();
    SolverConfig solver;
    solver.max_iters = opt.iters;
    auto [h, trace] = transcribe_activations(spec.values, lib.tensor, solver);
    const double solve_seconds = timer.stop("solve");

    timer.start();
    PeakPickConfig pick;
    pick.delta = opt.delta;
    pick.half_window = 10;
    pick.hop_seconds = spec.hop_seconds;
    const auto onsets = pick_onsets(h, pick);
    const auto events = events_from_onsets(onsets, lib, pick);
    timer.stop("pick");

    timer.start();
    write_midi(events, opt.out_midi);
    if (!opt.csv_path.empty())
        write_activation_csv(h, spec.hop_seconds, static_cast<int>(lib.midi_base), opt.csv_path);
    timer.stop("write");

    const double final_cost = trace.cost_per_iteration.back();
    const double audio_seconds = clip.seconds();
    std::printf("transcribed %s: %.1fs audio, %zu frames, final KL %.6g, %zu events\n",
                opt.in_wav.c_str(), audio_seconds, spec.frames(), final_cost, events.size());
    std::printf("solve %.2fs (%.2fs per 30s of audio)\n", solve_seconds,
                audio_seconds > 0 ? solve_seconds * 30.0 / audio_seconds : 0.0);

    nlohmann::ordered_json manifest;
    manifest["command"] = "transcribe";
    manifest["parameters"] = {{"delta", opt.delta},
                              {"iters", opt.iters},
                              {"half_window", pick.half_window},
                              {"sample_rate", lib.sample_rate},
                              {"window_length", lib.stft.window_length},
                              {"hop_length", lib.stft.hop_length},
                              {"fft_size", lib.stft.fft_size},
                              {"tau", lib.tensor.tau},
                              {"midi_base", lib.midi_base}};
    manifest["inputs"] = {{"audio", opt.in_wav},
                          {"library", opt.lib_path},
                          {"audio_seconds", audio_seconds}};
    manifest["outputs"] = {{"midi", opt.out_midi},
                           {"events", events.size()},
                           {"final_kl", final_cost},
                           {"solver_iterations", trace.iterations_run}};
    if (!opt.csv_path.empty()) manifest["outputs"]["activations_csv"] = opt.csv_path;
    if (!opt.spec_csv_path.empty()) manifest["outputs"]["spectrogram_csv"] = opt.spec_csv_path;
    manifest["timings_seconds"] = detail::timings_json(timer);
    const std::string mpath =
        opt.manifest_path.empty() ? opt.out_midi + ".manifest.json" : opt.manifest_path;
    detail::write_manifest(mpath, std::move(manifest));
}

// ---------------------------------------------------------------------------

struct EvalOptions {
    std::string est_dir;
    std::string ref_dir;
    double tol = kOnsetTolerance;
    double first_seconds = 0.0; // 0 disables truncation
    std::string sweep;          // "", "global", or "song"
    std::string report_path = "eval_report.csv";
    int jobs = 0;
    std::string manifest_path; // default <report>.manifest.json
};

inline void run_eval(const EvalOptions& opt) {
    if (!(opt.tol > 0.0)) fail(Errc::bad_argument, "tolerance must be positive");
    if (!opt.sweep.empty() && opt.sweep != "global" && opt.sweep != "song")
        fail(Errc::bad_argument, "sweep mode must be 'global' or 'song'");
    detail::PhaseTimer timer;

    timer.start();
    const bool sweeping = !opt.sweep.empty();
    const auto est_files = detail::scan_by_stem(opt.est_dir, sweeping ? ".csv" : ".mid");
    const auto ref_files = detail::scan_by_stem(opt.ref_dir, ".mid");

    std::string unmatched;
    for (const auto& [stem, path] : est_files)
        if (!ref_files.count(stem)) unmatched += (unmatched.empty() ? "" : ", ") + stem;
    for (const auto& [stem, path] : ref_files)
        if (!est_files.count(stem)) unmatched += (unmatched.empty() ? "" : ", ") + stem;
    if (!unmatched.empty())
        fail(Errc::unmatched_files, "unmatched files across directories: " + unmatched);
    if (est_files.empty()) fail(Errc::unmatched_files, "no songs found");
    timer.stop("scan");

    std::vector<std::string> names;
    for (const auto& [stem, path] : est_files) names.push_back(stem);
    const std::size_t count = names.size();

    timer.start();
    std::vector<std::vector<NoteEvent>> refs(count);
    parallel_for(count, opt.jobs, [&](std::size_t s) {
        auto events = read_midi(ref_files.at(names[s]));
        if (opt.first_seconds > 0.0) events = truncate_events(events, opt.first_seconds);
        refs[s] = std::move(events);
    });

    std::vector<std::string> row_names;
    std::vector<double> row_deltas;
    std::vector<EvalReport> row_reports;
    std::vector<EvalReport> per_song;
    nlohmann::ordered_json sweep_json;

    if (!sweeping) {
        per_song.resize(count);
        parallel_for(count, opt.jobs, [&](std::size_t s) {
            auto est = read_midi(est_files.at(names[s]));
            if (opt.first_seconds > 0.0) est = truncate_events(est, opt.first_seconds);
            per_song[s] = score(refs[s], est, opt.tol);
        });
        for (std::size_t s = 0; s < count; ++s) {
            row_names.push_back(names[s]);
            row_deltas.push_back(std::nan(""));
            row_reports.push_back(per_song[s]);
        }
    } else {
        std::vector<SweepSong> songs(count);
        parallel_for(count, opt.jobs, [&](std::size_t s) {
            ActivationCsv csv = read_activation_csv(est_files.at(names[s]));
            SweepSong song;
            song.name = names[s];
            song.hop_seconds = csv.hop_seconds;
            song.midi_base = csv.midi_base;
            if (opt.first_seconds > 0.0) {
                const auto keep = std::min<std::size_t>(
                    csv.values.cols(),
                    static_cast<std::size_t>(std::ceil(opt.first_seconds / csv.hop_seconds)));
                Matrix trimmed(csv.values.rows(), keep);
                for (std::size_t q = 0; q < csv.values.rows(); ++q)
                    for (std::size_t t = 0; t < keep; ++t) trimmed(q, t) = csv.values(q, t);
                song.activations = std::move(trimmed);
            } else {
                song.activations = std::move(csv.values);
            }
            songs[s] = std::move(song);
        });

        const auto grid = default_delta_grid();
        const auto mode = opt.sweep == "global" ? SweepMode::global : SweepMode::per_song;
        const auto sweep = sweep_thresholds(songs, refs, grid, mode, opt.tol);

        for (std::size_t s = 0; s < count; ++s) {
            const std::size_t g = mode == SweepMode::global ? sweep.best_global_index
                                                            : sweep.best_per_song_index[s];
            row_names.push_back(names[s]);
            row_deltas.push_back(grid[g]);
            row_reports.push_back(sweep.reports[s][g]);
            per_song.push_back(sweep.reports[s][g]);
        }
        sweep_json["mode"] = opt.sweep;
        sweep_json["grid_size"] = grid.size();
        sweep_json["best_global_delta"] = sweep.best_global_delta;
        sweep_json["best_per_song_delta"] = sweep.best_per_song_delta;
        std::printf("threshold sweep (%s): best global delta %.2f\n", opt.sweep.c_str(),
                    sweep.best_global_delta);
    }
    timer.stop("score");

    const EvalReport macro = mean_report(per_song);
    const EvalReport micro = pool_reports(per_song);

    for (std::size_t s = 0; s < count; ++s) {
        char delta_str[16] = "-";
        if (!std::isnan(row_deltas[s])) std::snprintf(delta_str, sizeof(delta_str), "%.2f", row_deltas[s]);
        std::printf("%s\n", format_report_row(row_names[s], delta_str, row_reports[s]).c_str());
    }
    std::printf("%s\n", format_report_row("ALL (macro mean)", "-", macro).c_str());
    std::printf("%s\n", format_report_row("ALL (micro pooled)", "-", micro).c_str());

    timer.start();
    auto csv_names = row_names;
    auto csv_deltas = row_deltas;
    auto csv_reports = row_reports;
    csv_names.push_back("ALL_macro");
    csv_deltas.push_back(std::nan(""));
    csv_reports.push_back(macro);
    csv_names.push_back("ALL_micro");
    csv_deltas.push_back(std::nan(""));
    csv_reports.push_back(micro);
    write_report_csv(csv_names, csv_deltas, csv_reports, opt.report_path);
    timer.stop("report");

    nlohmann::ordered_json manifest;
    manifest["command"] = "eval";
    manifest["parameters"] = {{"tolerance", opt.tol},
                              {"first_seconds", opt.first_seconds},
                              {"sweep", opt.sweep.empty() ? "off" : opt.sweep},
                              {"jobs", resolve_job_count(opt.jobs)}};
    if (!sweep_json.is_null()) manifest["sweep"] = sweep_json;
    manifest["inputs"] = {{"est_dir", opt.est_dir},
                          {"ref_dir", opt.ref_dir},
                          {"songs", count}};
    manifest["outputs"] = {{"report", opt.report_path},
                           {"macro_f", macro.f_measure},
                           {"micro_f", micro.f_measure}};
    manifest["timings_seconds"] = detail::timings_json(timer);
    const std::string mpath =
        opt.manifest_path.empty() ? opt.report_path + ".manifest.json" : opt.manifest_path;
    detail::write_manifest(mpath, std::move(manifest));
}

// ---------------------------------------------------------------------------

struct SynthbenchOptions {
    uint64_t seed = 7;
    double scale = 1.0;
    std::string manifest_path = "cnmft_synthbench.manifest.json";
};

/// Runs the built-in verification suite. Returns 0 when every check passes,
/// 3 otherwise.
inline int run_synthbench(const SynthbenchOptions& opt) {
    if (!(opt.scale >= 0.05)) fail(Errc::bad_argument, "scale must be >= 0.05");
    selfcheck::SuiteConfig cfg;
    cfg.seed = opt.seed;
    cfg.scale = opt.scale;
    const auto results = selfcheck::run_all(cfg);

    int failed = 0;
    for (const auto& r : results) {
        std::printf("%-34s %s  %s (%.2fs)\n", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                    r.detail.c_str(), r.seconds);
        if (!r.passed) ++failed;
    }
    std::printf("synthbench: %zu checks, %d failed (seed %llu, scale %.2f)\n", results.size(),
                failed, static_cast<unsigned long long>(opt.seed), opt.scale);

    nlohmann::ordered_json manifest;
    manifest["command"] = "synthbench";
    manifest["parameters"] = {{"seed", opt.seed}, {"scale", opt.scale}};
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& r : results)
        checks.push_back({{"name", r.name},
                          {"passed", r.passed},
                          {"detail", r.detail},
                          {"seconds", r.seconds}});
    manifest["checks"] = checks;
    manifest["outputs"] = {{"failed", failed}};
    detail::write_manifest(opt.manifest_path, std::move(manifest));
    return failed == 0 ? 0 : 3;
}

} // namespace cnmft::cli
