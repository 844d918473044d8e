#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "cnmft/cnmf.hpp"
#include "cnmft/evaluate.hpp"
#include "cnmft/stft.hpp"
#include "cnmft/synth.hpp"
#include "cnmft/transcriber.hpp"

namespace cnmft::selfcheck {

/// Outcome of one verification check, with the measured quantity so a report
/// can show how much margin was left.
struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct SuiteConfig {
    uint64_t seed = 7;
    double scale = 1.0; // multiplies instance counts / workload sizes
    // Harness self-test: adds bias*k to the k-th recorded cost before the
    // monotonicity comparison, simulating a drifting update rule. Keep 0.
    double monotonicity_cost_bias = 0.0;
};

namespace detail {

/// Deterministic uniform doubles independent of the standard library's
/// distribution implementations.
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(uint64_t seed) : eng(seed) {}
    double u01() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng() % n); }
    int range(int lo, int hi) { return lo + static_cast<int>(eng() % static_cast<uint64_t>(hi - lo + 1)); }
};

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

inline TemplateTensor random_tensor(Rng& rng, std::size_t n, std::size_t tau, std::size_t r,
                                    double lo, double hi) {
    TemplateTensor w(n, tau, r);
    for (auto& v : w.values) v = rng.uniform(lo, hi);
    return w;
}

// ---- independent oracles -------------------------------------------------
// These re-derive the checked quantities from their definitions with plain
// loops and share no code with the implementations they verify.

/// Convolutive model straight from the definition:
/// out[f][t] = sum_q sum_i W[f][i][q] * H[q][t-i], zero for t-i < 0.
inline Matrix apply_bruteforce(const TemplateTensor& w, const Matrix& h) {
    Matrix out(w.n, h.cols(), 0.0);
    for (std::size_t f = 0; f < w.n; ++f)
        for (std::size_t t = 0; t < h.cols(); ++t) {
            double acc = 0.0;
            for (std::size_t q = 0; q < w.r; ++q)
                for (std::size_t i = 0; i < w.tau; ++i)
                    if (t >= i) acc += w.at(f, i, q) * h(q, t - i);
            out(f, t) = acc;
        }
    return out;
}

/// Classical plain-NMF KL updates (the tau=1 special case), coded from the
/// textbook formulas over explicit matrices.
inline Matrix nmf_model(const Matrix& w0, const Matrix& h) {
    Matrix out(w0.rows(), h.cols(), 0.0);
    for (std::size_t f = 0; f < w0.rows(); ++f)
        for (std::size_t t = 0; t < h.cols(); ++t) {
            double acc = 0.0;
            for (std::size_t q = 0; q < w0.cols(); ++q) acc += w0(f, q) * h(q, t);
            out(f, t) = acc;
        }
    return out;
}

inline Matrix nmf_update_h(const Matrix& m, const Matrix& w0, const Matrix& h, double eps) {
    const Matrix model = nmf_model(w0, h);
    Matrix out = h;
    for (std::size_t q = 0; q < h.rows(); ++q) {
        double den = 0.0;
        for (std::size_t f = 0; f < w0.rows(); ++f) den += w0(f, q);
        for (std::size_t t = 0; t < h.cols(); ++t) {
            double num = 0.0;
            for (std::size_t f = 0; f < w0.rows(); ++f)
                num += w0(f, q) * (m(f, t) / (model(f, t) + eps));
            out(q, t) = h(q, t) * (num / (den + eps));
        }
    }
    return out;
}

inline Matrix nmf_update_w(const Matrix& m, const Matrix& w0, const Matrix& h, double eps) {
    const Matrix model = nmf_model(w0, h);
    Matrix out = w0;
    for (std::size_t q = 0; q < h.rows(); ++q) {
        double den = 0.0;
        for (std::size_t t = 0; t < h.cols(); ++t) den += h(q, t);
        for (std::size_t f = 0; f < w0.rows(); ++f) {
            double num = 0.0;
            for (std::size_t t = 0; t < h.cols(); ++t)
                num += (m(f, t) / (model(f, t) + eps)) * h(q, t);
            out(f, q) = w0(f, q) * (num / (den + eps));
        }
    }
    return out;
}

/// Adaptive-threshold rule evaluated literally at every frame.
inline std::vector<std::vector<std::size_t>> onsets_bruteforce(const Matrix& h, double delta,
                                                               int half_window) {
    std::vector<std::vector<std::size_t>> out(h.rows());
    const long m = static_cast<long>(h.cols());
    for (std::size_t q = 0; q < h.rows(); ++q) {
        for (long t = 0; t < m; ++t) {
            double sum = 0.0;
            for (long j = -half_window; j <= half_window; ++j) {
                const long u = t + j;
                if (u >= 0 && u < m) sum += h(q, static_cast<std::size_t>(u));
            }
            const double mean = sum / (2.0 * half_window + 1.0);
            if (h(q, static_cast<std::size_t>(t)) > mean + delta)
                out[q].push_back(static_cast<std::size_t>(t));
        }
    }
    return out;
}

/// Exhaustive maximum matching over all pitch/tolerance-feasible pairings
/// (bitmask DP over the estimated notes; intended for <= 6+6 instances).
inline long matching_bruteforce(const std::vector<NoteEvent>& ref,
                                const std::vector<NoteEvent>& est, double tol) {
    const std::size_t ne = est.size();
    std::vector<std::vector<int>> memo(ref.size() + 1,
                                       std::vector<int>(static_cast<std::size_t>(1) << ne, -1));
    auto rec = [&](auto&& self, std::size_t i, unsigned mask) -> int {
        if (i == ref.size()) return 0;
        int& slot = memo[i][mask];
        if (slot >= 0) return slot;
        int best = self(self, i + 1, mask); // leave ref[i] unmatched
        for (std::size_t j = 0; j < ne; ++j) {
            if (mask & (1u << j)) continue;
            if (ref[i].pitch == est[j].pitch && std::abs(ref[i].onset - est[j].onset) <= tol)
                best = std::max(best, 1 + self(self, i + 1, mask | (1u << j)));
        }
        slot = best;
        return best;
    };
    return rec(rec, 0, 0u);
}

inline double best_shift_cosine(const TemplateTensor& got, const TemplateTensor& want) {
    auto cosine = [](const std::vector<double>& a, const std::vector<double>& b) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            dot += a[k] * b[k];
            na += a[k] * a[k];
            nb += b[k] * b[k];
        }
        return na > 0 && nb > 0 ? dot / std::sqrt(na * nb) : 0.0;
    };
    std::vector<double> target(want.values);
    double best = -1.0;
    for (std::size_t s = 0; s < got.tau; ++s) {
        std::vector<double> shifted(got.size());
        for (std::size_t i = 0; i < got.tau; ++i) {
            auto src = got.slice(0, (i + s) % got.tau);
            for (std::size_t f = 0; f < got.n; ++f) shifted[i * got.n + f] = src[f];
        }
        std::vector<double> flat(want.size());
        for (std::size_t i = 0; i < want.tau; ++i) {
            auto src = want.slice(0, i);
            for (std::size_t f = 0; f < want.n; ++f) flat[i * want.n + f] = src[f];
        }
        best = std::max(best, cosine(shifted, flat));
    }
    return best;
}

template <typename Fn>
inline CheckResult timed(const std::string& name, Fn&& fn) {
    CheckResult res;
    res.name = name;
    const auto start = std::chrono::steady_clock::now();
    fn(res);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

inline std::string fmt(const char* format, ...) {
    char buf[256];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

inline int scaled(int base, double scale) {
    return std::max(1, static_cast<int>(std::lround(base * scale)));
}

} // namespace detail

/// Alternating multiplicative updates never increase the KL objective
/// (up to 1e-9 relative slack) across randomized problem instances.
inline CheckResult check_monotone_descent(const SuiteConfig& cfg) {
    return detail::timed("monotone-kl-descent", [&](CheckResult& res) {
        detail::Rng rng(cfg.seed * 1000003 + 1);
        const int instances = detail::scaled(50, cfg.scale);
        double worst = 0.0; // max of cost[k+1]/cost[k] - 1
        for (int inst = 0; inst < instances; ++inst) {
            const auto n = static_cast<std::size_t>(rng.range(8, 64));
            const auto m = static_cast<std::size_t>(rng.range(16, 128));
            const auto r = static_cast<std::size_t>(rng.range(1, 8));
            const auto tau = static_cast<std::size_t>(rng.range(1, 6));
            Matrix data = detail::random_matrix(rng, n, m, 0.05, 1.0);
            TemplateTensor w = detail::random_tensor(rng, n, tau, r, 0.05, 1.0);
            Matrix h = detail::random_matrix(rng, r, m, 0.05, 1.0);
            SolverConfig solver;
            solver.max_iters = 500;
            const FitTrace trace = fit_cnmf(data, w, h, solver);
            const auto& c = trace.cost_per_iteration;
            for (std::size_t k = 0; k + 1 < c.size(); ++k) {
                const double prev = c[k] + cfg.monotonicity_cost_bias * static_cast<double>(k);
                const double next =
                    c[k + 1] + cfg.monotonicity_cost_bias * static_cast<double>(k + 1);
                if (prev > 0.0) worst = std::max(worst, next / prev - 1.0);
            }
        }
        res.passed = worst <= 1e-9;
        res.detail = detail::fmt("%d instances x 500 iters, max relative increase %.3g (bound 1e-9)",
                                 instances, worst);
    });
}

/// With tau=1 the convolutive model and updates reduce exactly to classical
/// KL-NMF, compared against an independent plain-matrix implementation.
inline CheckResult check_nmf_degeneracy(const SuiteConfig& cfg) {
    return detail::timed("nmf-degeneracy-tau1", [&](CheckResult& res) {
        detail::Rng rng(cfg.seed * 1000003 + 2);
        const int instances = detail::scaled(20, cfg.scale);
        double worst = 0.0;
        for (int inst = 0; inst < instances; ++inst) {
            const auto n = static_cast<std::size_t>(rng.range(4, 24));
            const auto m = static_cast<std::size_t>(rng.range(6, 32));
            const auto r = static_cast<std::size_t>(rng.range(1, 6));
            Matrix w0 = detail::random_matrix(rng, n, r, 0.1, 1.0);
            Matrix h = detail::random_matrix(rng, r, m, 0.1, 1.0);
            Matrix data = detail::random_matrix(rng, n, m, 0.1, 1.0);

            TemplateTensor w(n, 1, r);
            for (std::size_t q = 0; q < r; ++q) {
                auto dst = w.slice(q, 0);
                for (std::size_t f = 0; f < n; ++f) dst[f] = w0(f, q);
            }

            worst = std::max(worst, max_abs_diff(cnmf_apply(w, h), detail::nmf_model(w0, h)));
            worst = std::max(worst,
                             max_abs_diff(update_H(data, w, h), detail::nmf_update_h(data, w0, h, 1e-12)));

            const TemplateTensor wu = update_W(data, w, h);
            const Matrix wo = detail::nmf_update_w(data, w0, h, 1e-12);
            for (std::size_t q = 0; q < r; ++q)
                for (std::size_t f = 0; f < n; ++f)
                    worst = std::max(worst, std::abs(wu.at(f, 0, q) - wo(f, q)));
        }
        res.passed = worst <= 1e-12;
        res.detail =
            detail::fmt("%d instances, max |cnmf - plain nmf| = %.3g (bound 1e-12)", instances, worst);
    });
}

/// The fixed-dictionary activation problem is convex: runs from different
/// random initializations reach the same objective.
inline CheckResult check_fixed_dictionary_convexity(const SuiteConfig& cfg) {
    return detail::timed("fixed-dictionary-convexity", [&](CheckResult& res) {
        detail::Rng rng(cfg.seed * 1000003 + 3);
        const int instances = detail::scaled(10, cfg.scale);
        double worst = 0.0;
        for (int inst = 0; inst < instances; ++inst) {
            const std::size_t n = 48, m = 32, r = 3, tau = 3;
            TemplateTensor w = detail::random_tensor(rng, n, tau, r, 0.05, 1.0);
            Matrix h_unit(r, m, 1.0);
            normalize_templates(w, h_unit);
            Matrix h_true = detail::random_matrix(rng, r, m, 0.0, 1.0);
            Matrix data = cnmf_apply(w, h_true);
            // A solid noise floor keeps the optimum away from the boundary,
            // where multiplicative updates converge slowly.
            for (auto& v : data.data()) v += rng.uniform(0.1, 0.3);

            double lo = 0.0, hi = 0.0;
            for (int init = 0; init < 5; ++init) {
                Matrix h = detail::random_matrix(rng, r, m, 0.05, 1.0);
                const double s = std::pow(10.0, rng.uniform(-1.0, 1.0));
                for (auto& v : h.data()) v *= s;
                SolverConfig solver;
                solver.max_iters = 500;
                const FitTrace trace = solve_activations(data, w, h, solver);
                const double final_cost = trace.cost_per_iteration.back();
                if (init == 0) {
                    lo = hi = final_cost;
                } else {
                    lo = std::min(lo, final_cost);
                    hi = std::max(hi, final_cost);
                }
            }
            worst = std::max(worst, (hi - lo) / std::max(lo, 1e-300));
        }
        res.passed = worst <= 1e-4;
        res.detail = detail::fmt(
            "%d instances x 5 inits x 500 iters, max relative objective spread %.3g (bound 1e-4)",
            instances, worst);
    });
}

/// Rank-one training recovers a planted template from impulse-train data.
inline CheckResult check_template_recovery(const SuiteConfig& cfg) {
    return detail::timed("planted-template-recovery", [&](CheckResult& res) {
        detail::Rng rng(cfg.seed * 1000003 + 4);
        const int seeds = detail::scaled(10, cfg.scale);
        double worst = 1.0;
        for (int s = 0; s < seeds; ++s) {
            const std::size_t n = 32, tau = 4, m = 48;
            TemplateTensor planted = detail::random_tensor(rng, n, tau, 1, 0.0, 1.0);
            Matrix h(1, m, 0.0);
            for (std::size_t t : {std::size_t{2}, std::size_t{20}, std::size_t{38}})
                h(0, t) = rng.uniform(0.8, 1.2);
            const Matrix data = cnmf_apply(planted, h);

            SolverConfig solver;
            solver.max_iters = 500;
            solver.rel_tol = 1e-12;
            auto [trained, trace] = train_note_template(data, tau, solver);
            worst = std::min(worst, detail::best_shift_cosine(trained, planted));
        }
        res.passed = worst > 0.99;
        res.detail =
            detail::fmt("%d seeds, min best-shift cosine similarity %.6f (bound > 0.99)", seeds, worst);
    });
}

/// Transcription of exact-model data recovers well-separated planted onsets
/// exactly after adaptive-threshold peak picking at delta = 0.05.
inline CheckResult check_transcription_roundtrip(const SuiteConfig& cfg) {
    return detail::timed("planted-transcription-roundtrip", [&](CheckResult& res) {
        detail::Rng rng(cfg.seed * 1000003 + 5);
        const int seeds = detail::scaled(10, cfg.scale);
        int exact = 0;
        long tp = 0, total_ref = 0, total_est = 0;
        for (int s = 0; s < seeds; ++s) {
            const std::size_t n = 32, r = 3, tau = 4, m = 120;
            TemplateTensor w = detail::random_tensor(rng, n, tau, r, 0.05, 1.0);
            Matrix h_unit(r, m, 1.0);
            normalize_templates(w, h_unit);

            Matrix h_true(r, m, 0.0);
            std::vector<std::vector<std::size_t>> planted(r);
            for (std::size_t q = 0; q < r; ++q) {
                std::size_t t = 5 + rng.index(10);
                while (t + tau < m - 5) {
                    h_true(q, t) = rng.uniform(0.7, 1.5);
                    planted[q].push_back(t);
                    t += tau + 2 + rng.index(20); // separation > tau
                }
            }
            const Matrix data = cnmf_apply(w, h_true);

            SolverConfig solver;
            solver.max_iters = 100;
            auto [h, trace] = transcribe_activations(data, w, solver);

            PeakPickConfig pick;
            pick.delta = 0.05;
            pick.half_window = 10;
            pick.hop_seconds = 0.02;
            const auto got = pick_onsets(h, pick);
            if (got == planted) ++exact;
            for (std::size_t q = 0; q < r; ++q) {
                total_ref += static_cast<long>(planted[q].size());
                total_est += static_cast<long>(got[q].size());
                for (std::size_t t : got[q])
                    if (h_true(q, t) > 0) ++tp;
            }
        }
        res.passed = exact == seeds;
        const auto rep = EvalReport::from_counts(tp, total_est - tp, total_ref - tp);
        res.detail = detail::fmt("%d/%d seeds exact, pooled F = %.4f (need exact recovery)", exact,
                                 seeds, rep.f_measure);
    });
}

/// The fast onset picker agrees with a literal re-evaluation of the
/// detection rule at every frame and every grid threshold.
inline CheckResult check_peak_picking_oracle(const SuiteConfig& cfg) {
    return detail::timed("peak-picking-bruteforce", [&](CheckResult& res) {
        detail::Rng rng(cfg.seed * 1000003 + 6);
        const int instances = detail::scaled(100, cfg.scale);
        const auto grid = default_delta_grid();
        long mismatches = 0;
        for (int inst = 0; inst < instances; ++inst) {
            Matrix h(8, 200, 0.0);
            for (auto& v : h.data()) v = rng.uniform(0.0, 0.08);
            for (int k = 0; k < 40; ++k)
                h(rng.index(8), rng.index(200)) = rng.uniform(0.1, 1.5);
            for (double delta : grid) {
                PeakPickConfig pick;
                pick.delta = delta;
                pick.half_window = 10;
                pick.hop_seconds = 0.02;
                if (pick_onsets(h, pick) != detail::onsets_bruteforce(h, delta, 10)) ++mismatches;
            }
        }
        res.passed = mismatches == 0;
        res.detail = detail::fmt("%d matrices x %zu thresholds, %ld mismatches", instances,
                                 grid.size(), mismatches);
    });
}

/// The augmenting-path matcher finds a true maximum matching, verified
/// against exhaustive search on small instances.
inline CheckResult check_matching_oracle(const SuiteConfig& cfg) {
    return detail::timed("note-matching-bruteforce", [&](CheckResult& res) {
        detail::Rng rng(cfg.seed * 1000003 + 7);
        const int instances = detail::scaled(1000, cfg.scale);
        long mismatches = 0;
        for (int inst = 0; inst < instances; ++inst) {
            auto gen = [&](std::size_t count) {
                std::vector<NoteEvent> ev(count);
                for (auto& e : ev) {
                    e.pitch = 60 + rng.range(0, 3);
                    e.onset = rng.uniform(0.0, 0.5);
                }
                return ev;
            };
            const auto ref = gen(rng.index(7));
            const auto est = gen(rng.index(7));
            const auto got = match_notes(ref, est, 0.05);
            if (got.tp != detail::matching_bruteforce(ref, est, 0.05)) ++mismatches;
        }
        res.passed = mismatches == 0;
        res.detail = detail::fmt("%d random instances (<=6+6 notes), %ld mismatches", instances,
                                 mismatches);
    });
}

/// The default analysis protocol yields 4097 bins x 1501 frames for 30 s of
/// 44100 Hz audio.
inline CheckResult check_stft_dimensions(const SuiteConfig& cfg) {
    return detail::timed("stft-dimensions", [&](CheckResult& res) {
        (void)cfg;
        AudioClip clip;
        clip.sample_rate = 44100;
        clip.samples.resize(44100 * 30);
        for (std::size_t t = 0; t < clip.samples.size(); ++t)
            clip.samples[t] = 0.4 * std::sin(2.0 * std::numbers::pi * 440.0 * t / 44100.0);
        const Spectrogram spec = compute_spectrogram(clip, StftConfig{});
        res.passed = spec.bins() == 4097 && spec.frames() == 1501;
        res.detail = detail::fmt("30 s @ 44100 Hz -> %zu bins x %zu frames (want 4097 x 1501)",
                                 spec.bins(), spec.frames());
    });
}

/// Full pipeline on synthetic audio: trains templates from isolated damped
/// harmonic notes, transcribes a mixed sequence, and scores note-wise F at
/// the best grid threshold.
inline CheckResult check_end_to_end(const SuiteConfig& cfg) {
    return detail::timed("end-to-end-microbench", [&](CheckResult& res) {
        const int sr = kPipelineSampleRate;
        const std::vector<int> pitches = {60, 61, 62};
        const std::size_t tau = 10;
        const double note_seconds = 1.0;
        const double decay = 0.25;
        const StftConfig stft;
        const double hop_s = static_cast<double>(stft.hop_length) / sr;

        SolverConfig train_cfg;
        train_cfg.max_iters = 500;
        train_cfg.rel_tol = 1e-8;

        // The mix is scaled so one event carries roughly unit spectrogram
        // mass; with unit-mass templates the activation peaks then sit in
        // the range the default threshold grid covers.
        AudioClip probe;
        probe.sample_rate = sr;
        probe.samples = synth_damped_note(midi_to_hz(pitches[1]), note_seconds, sr, 8, decay, 0.5);
        const double unit_mass = l1_norm(compute_spectrogram(probe, stft).values);
        const double mix_amplitude = 0.5 / unit_mass;

        TemplateTensor dict;
        for (std::size_t q = 0; q < pitches.size(); ++q) {
            AudioClip clip;
            clip.sample_rate = sr;
            clip.samples = synth_damped_note(midi_to_hz(pitches[q]), note_seconds, sr, 8, decay, 0.5);
            const Spectrogram spec = compute_spectrogram(clip, stft);
            auto [tpl, trace] = train_note_template(spec.values, tau, train_cfg);
            if (q == 0) dict = TemplateTensor(tpl.n, tau, pitches.size());
            for (std::size_t i = 0; i < tau; ++i) {
                auto dst = dict.slice(q, i);
                auto src = tpl.slice(0, i);
                std::copy(src.begin(), src.end(), dst.begin());
            }
        }

        detail::Rng rng(cfg.seed * 1000003 + 9);
        const int event_count = detail::scaled(12, cfg.scale);
        std::vector<SequenceEvent> planted;
        std::vector<NoteEvent> ref;
        double cursor = 0.4;
        for (int k = 0; k < event_count; ++k) {
            SequenceEvent ev;
            ev.midi = pitches[rng.index(pitches.size())];
            ev.onset = cursor; // frame-aligned: a whole number of hops
            cursor += hop_s * static_cast<double>(30 + rng.index(12));
            planted.push_back(ev);
            NoteEvent e;
            e.pitch = ev.midi;
            e.onset = ev.onset;
            ref.push_back(e);
        }
        const double total_seconds = cursor + 1.0;
        const AudioClip mix = synth_sequence(planted, total_seconds, sr, note_seconds, mix_amplitude);
        const Spectrogram spec = compute_spectrogram(mix, stft);

        SolverConfig solve_cfg;
        solve_cfg.max_iters = 100;
        solve_cfg.rel_tol = 1e-9;
        auto [h, trace] = transcribe_activations(spec.values, dict, solve_cfg);

        SweepSong song;
        song.name = "microbench";
        song.activations = std::move(h);
        song.hop_seconds = spec.hop_seconds;
        song.midi_base = pitches[0];
        const auto sweep =
            sweep_thresholds({song}, {ref}, default_delta_grid(), SweepMode::per_song);
        const auto& best = sweep.reports[0][sweep.best_per_song_index[0]];
        res.passed = best.f_measure >= 0.9;
        res.detail =
            detail::fmt("%d events over %.0f s: best grid delta %.2f -> F = %.4f (bound >= 0.9)",
                        event_count, total_seconds, sweep.best_per_song_delta[0], best.f_measure);
    });
}

inline std::vector<CheckResult> run_all(const SuiteConfig& cfg = {}) {
    return {
        check_monotone_descent(cfg),
        check_nmf_degeneracy(cfg),
        check_fixed_dictionary_convexity(cfg),
        check_template_recovery(cfg),
        check_transcription_roundtrip(cfg),
        check_peak_picking_oracle(cfg),
        check_matching_oracle(cfg),
        check_stft_dimensions(cfg),
        check_end_to_end(cfg),
    };
}

} // namespace cnmft::selfcheck
