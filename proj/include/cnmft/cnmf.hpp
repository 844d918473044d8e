#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cnmft/matrix.hpp"

namespace cnmft {

/// Per-note convolutive templates W, indexed [frequency f][shift i][note q].
/// Storage is note-major, then shift, with the frequency axis contiguous —
/// the same order as the on-disk library format.
struct TemplateTensor {
    std::vector<double> values;
    std::size_t n = 0;   // frequency bins
    std::size_t tau = 0; // convolution window length in frames
    std::size_t r = 0;   // number of notes

    TemplateTensor() = default;
    TemplateTensor(std::size_t n_, std::size_t tau_, std::size_t r_)
        : values(n_ * tau_ * r_, 0.0), n(n_), tau(tau_), r(r_) {}

    double& at(std::size_t f, std::size_t i, std::size_t q) {
        return values[(q * tau + i) * n + f];
    }
    double at(std::size_t f, std::size_t i, std::size_t q) const {
        return values[(q * tau + i) * n + f];
    }

    /// Contiguous spectral slice for note q at shift i.
    std::span<double> slice(std::size_t q, std::size_t i) {
        return {values.data() + (q * tau + i) * n, n};
    }
    std::span<const double> slice(std::size_t q, std::size_t i) const {
        return {values.data() + (q * tau + i) * n, n};
    }

    std::size_t size() const noexcept { return values.size(); }
};

struct SolverConfig {
    int max_iters = 500;     // training default; transcription uses 100
    double epsilon = 1e-12;  // division/log floor
    double rel_tol = 0.0;    // early stop on relative cost change; 0 disables
    uint64_t seed = 0;       // reserved for randomized initializations
};

struct FitTrace {
    std::vector<double> cost_per_iteration; // objective after each iteration
    int iterations_run = 0;
};

namespace detail {

inline void require_tensor_nonnegative(const TemplateTensor& w, const char* what) {
    for (double v : w.values)
        if (!(v >= 0.0) || !std::isfinite(v))
            fail(Errc::negative_entry, std::string(what) + ": negative or non-finite entry");
}

/// Generalized KL divergence, no input validation. The 0*log(0/y) term is
/// taken as 0; eps floors the model inside the log and the linear term.
inline double kl_given(const Matrix& m, const Matrix& model, double eps) {
    double cost = 0.0;
    const auto& x = m.data();
    const auto& y = model.data();
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double ye = y[k] + eps;
        cost += ye;
        if (x[k] > 0.0) cost += x[k] * std::log(x[k] / ye) - x[k];
    }
    return cost;
}

/// model[f][t] = sum_{q,i} W[f][i][q] * H[q][t-i], with H[q][t-i] = 0 for
/// t-i < 0. No validation.
inline void apply_into(const TemplateTensor& w, const Matrix& h, Matrix& out) {
    const std::size_t m = h.cols();
    out.fill(0.0);
    for (std::size_t f = 0; f < w.n; ++f) {
        auto out_row = out.row(f);
        for (std::size_t q = 0; q < w.r; ++q) {
            auto h_row = h.row(q);
            for (std::size_t i = 0; i < w.tau; ++i) {
                const double wf = w.at(f, i, q);
                if (wf == 0.0) continue;
                for (std::size_t t = i; t < m; ++t) out_row[t] += wf * h_row[t - i];
            }
        }
    }
}

inline Matrix ratio_matrix(const Matrix& m, const Matrix& model, double eps) {
    Matrix r(m.rows(), m.cols());
    const auto& x = m.data();
    const auto& y = model.data();
    for (std::size_t k = 0; k < x.size(); ++k) r.data()[k] = x[k] / (y[k] + eps);
    return r;
}

/// Multiplicative H update given the current model. In place.
inline void update_h_with_model(const Matrix& m, const Matrix& model, const TemplateTensor& w,
                                Matrix& h, double eps) {
    const std::size_t mm = h.cols();
    const Matrix ratio = ratio_matrix(m, model, eps);

    Matrix num(w.r, mm, 0.0);
    for (std::size_t f = 0; f < w.n; ++f) {
        auto ratio_row = ratio.row(f);
        for (std::size_t q = 0; q < w.r; ++q) {
            auto num_row = num.row(q);
            for (std::size_t i = 0; i < w.tau; ++i) {
                const double wf = w.at(f, i, q);
                if (wf == 0.0) continue;
                const std::size_t last = mm > i ? mm - i : 0;
                for (std::size_t t = 0; t < last; ++t) num_row[t] += wf * ratio_row[t + i];
            }
        }
    }

    // Denominator: per-shift template mass, truncated near the final frames
    // where t+i would run past the end of the signal.
    std::vector<double> prefix(w.tau + 1, 0.0);
    for (std::size_t q = 0; q < w.r; ++q) {
        prefix[0] = 0.0;
        for (std::size_t i = 0; i < w.tau; ++i) {
            double col = 0.0;
            for (double v : w.slice(q, i)) col += v;
            prefix[i + 1] = prefix[i] + col;
        }
        auto h_row = h.row(q);
        auto num_row = num.row(q);
        for (std::size_t t = 0; t < mm; ++t) {
            const std::size_t valid = std::min<std::size_t>(w.tau, mm - t);
            h_row[t] *= num_row[t] / (prefix[valid] + eps);
        }
    }
}

/// Multiplicative W update given the current model. In place.
inline void update_w_with_model(const Matrix& m, const Matrix& model, TemplateTensor& w,
                                const Matrix& h, double eps) {
    const std::size_t mm = h.cols();
    const Matrix ratio = ratio_matrix(m, model, eps);

    // Denominator: trailing activation mass per shift.
    Matrix den(w.r, w.tau, 0.0);
    for (std::size_t q = 0; q < w.r; ++q) {
        auto h_row = h.row(q);
        std::vector<double> pre(mm + 1, 0.0);
        for (std::size_t t = 0; t < mm; ++t) pre[t + 1] = pre[t] + h_row[t];
        for (std::size_t i = 0; i < w.tau && i < mm; ++i) den(q, i) = pre[mm - i];
    }

    for (std::size_t f = 0; f < w.n; ++f) {
        auto ratio_row = ratio.row(f);
        for (std::size_t q = 0; q < w.r; ++q) {
            auto h_row = h.row(q);
            for (std::size_t i = 0; i < w.tau; ++i) {
                double num = 0.0;
                for (std::size_t t = i; t < mm; ++t) num += ratio_row[t] * h_row[t - i];
                w.at(f, i, q) *= num / (den(q, i) + eps);
            }
        }
    }
}

inline void check_apply_shapes(const TemplateTensor& w, const Matrix& h) {
    if (w.n == 0 || w.tau == 0 || w.r == 0)
        fail(Errc::shape_mismatch, "empty template tensor");
    if (h.rows() != w.r)
        fail(Errc::shape_mismatch, "activation rows (" + std::to_string(h.rows()) +
                                       ") != template count (" + std::to_string(w.r) + ")");
}

} // namespace detail

/// Generalized Kullback-Leibler divergence between two same-shape nonnegative
/// matrices: sum of x*log(x/(y+eps)) - x + (y+eps), with the 0*log(0) term
/// dropped.
inline double kl_divergence(const Matrix& m, const Matrix& model, double eps = 1e-12) {
    if (!m.same_shape(model)) fail(Errc::shape_mismatch, "kl_divergence: shape mismatch");
    if (!(eps > 0.0)) fail(Errc::bad_argument, "kl_divergence: eps must be positive");
    require_nonnegative(m, "kl_divergence lhs");
    require_nonnegative(model, "kl_divergence rhs");
    return detail::kl_given(m, model, eps);
}

/// Evaluates the convolutive model: out[f][t] = sum_{q,i} W[f][i][q]*H[q][t-i].
inline Matrix cnmf_apply(const TemplateTensor& w, const Matrix& h) {
    detail::check_apply_shapes(w, h);
    Matrix out(w.n, h.cols());
    detail::apply_into(w, h, out);
    return out;
}

/// One multiplicative activation update. Nonnegativity is preserved and the
/// KL objective does not increase.
inline Matrix update_H(const Matrix& m, const TemplateTensor& w, const Matrix& h,
                       double eps = 1e-12) {
    detail::check_apply_shapes(w, h);
    if (m.rows() != w.n || m.cols() != h.cols())
        fail(Errc::shape_mismatch, "update_H: data shape mismatch");
    Matrix model(w.n, h.cols());
    detail::apply_into(w, h, model);
    Matrix out = h;
    detail::update_h_with_model(m, model, w, out, eps);
    return out;
}

/// One multiplicative template update, zero-padded activation convention.
inline TemplateTensor update_W(const Matrix& m, const TemplateTensor& w, const Matrix& h,
                               double eps = 1e-12) {
    detail::check_apply_shapes(w, h);
    if (m.rows() != w.n || m.cols() != h.cols())
        fail(Errc::shape_mismatch, "update_W: data shape mismatch");
    Matrix model(w.n, h.cols());
    detail::apply_into(w, h, model);
    TemplateTensor out = w;
    detail::update_w_with_model(m, model, out, h, eps);
    return out;
}

/// Rescales each template to unit total mass, pushing the removed factor into
/// the corresponding activation row. Identically zero templates are left
/// untouched. The model product W*H is invariant under this operation.
inline void normalize_templates(TemplateTensor& w, Matrix& h) {
    for (std::size_t q = 0; q < w.r; ++q) {
        double mass = 0.0;
        for (std::size_t i = 0; i < w.tau; ++i)
            for (double v : w.slice(q, i)) mass += v;
        if (mass <= 0.0) continue;
        const double inv = 1.0 / mass;
        for (std::size_t i = 0; i < w.tau; ++i)
            for (double& v : w.slice(q, i)) v *= inv;
        for (double& v : h.row(q)) v *= mass;
    }
}

/// Max-energy initialization for rank-one training: picks the tau consecutive
/// frames of V with the largest l1 norm (ties broken toward the smallest
/// start index), copies them as the initial template, and places a single
/// unit activation at that frame.
inline std::pair<TemplateTensor, Matrix> init_template(const Matrix& v, std::size_t tau) {
    const std::size_t n = v.rows();
    const std::size_t m = v.cols();
    if (tau == 0) fail(Errc::bad_argument, "init_template: tau must be >= 1");
    if (m < tau)
        fail(Errc::clip_too_short, "init_template: " + std::to_string(m) +
                                       " frames < tau = " + std::to_string(tau));

    std::vector<double> col_sums(m, 0.0);
    for (std::size_t f = 0; f < n; ++f) {
        auto row = v.row(f);
        for (std::size_t t = 0; t < m; ++t) col_sums[t] += row[t];
    }

    // Each window sum is accumulated fresh so equal windows compare equal and
    // the smallest start index wins.
    std::size_t best_t = 0;
    double best_sum = -1.0;
    for (std::size_t t = 0; t + tau <= m; ++t) {
        double s = 0.0;
        for (std::size_t u = 0; u < tau; ++u) s += col_sums[t + u];
        if (s > best_sum) {
            best_sum = s;
            best_t = t;
        }
    }

    TemplateTensor w(n, tau, 1);
    for (std::size_t i = 0; i < tau; ++i) {
        auto dst = w.slice(0, i);
        for (std::size_t f = 0; f < n; ++f) dst[f] = v(f, best_t + i);
    }
    Matrix h(1, m, 0.0);
    h(0, best_t) = 1.0;
    return {std::move(w), std::move(h)};
}

/// Alternating multiplicative descent on the convolutive KL objective.
/// Each iteration updates W, renormalizes, then updates H; the trace records
/// the objective after every full iteration and never increases.
inline FitTrace fit_cnmf(const Matrix& m, TemplateTensor& w, Matrix& h, const SolverConfig& cfg) {
    if (cfg.max_iters < 1) fail(Errc::bad_argument, "fit_cnmf: max_iters must be >= 1");
    detail::check_apply_shapes(w, h);
    if (m.rows() != w.n || m.cols() != h.cols())
        fail(Errc::shape_mismatch, "fit_cnmf: data shape mismatch");

    FitTrace trace;
    trace.cost_per_iteration.reserve(static_cast<std::size_t>(cfg.max_iters));
    Matrix model(w.n, h.cols());
    detail::apply_into(w, h, model);
    double prev = 0.0;
    for (int k = 0; k < cfg.max_iters; ++k) {
        detail::update_w_with_model(m, model, w, h, cfg.epsilon);
        normalize_templates(w, h);
        detail::apply_into(w, h, model);
        detail::update_h_with_model(m, model, w, h, cfg.epsilon);
        detail::apply_into(w, h, model);
        const double cost = detail::kl_given(m, model, cfg.epsilon);
        trace.cost_per_iteration.push_back(cost);
        trace.iterations_run = k + 1;
        if (cfg.rel_tol > 0.0 && k > 0 && prev - cost < cfg.rel_tol * std::max(prev, 1e-300))
            break;
        prev = cost;
    }
    return trace;
}

/// Fixed-template activation solve (H updates only).
inline FitTrace solve_activations(const Matrix& m, const TemplateTensor& w, Matrix& h,
                                  const SolverConfig& cfg) {
    if (cfg.max_iters < 1) fail(Errc::bad_argument, "solve_activations: max_iters must be >= 1");
    detail::check_apply_shapes(w, h);
    if (m.rows() != w.n || m.cols() != h.cols())
        fail(Errc::shape_mismatch, "solve_activations: data shape mismatch");

    FitTrace trace;
    trace.cost_per_iteration.reserve(static_cast<std::size_t>(cfg.max_iters));
    Matrix model(w.n, h.cols());
    detail::apply_into(w, h, model);
    double prev = 0.0;
    for (int k = 0; k < cfg.max_iters; ++k) {
        detail::update_h_with_model(m, model, w, h, cfg.epsilon);
        detail::apply_into(w, h, model);
        const double cost = detail::kl_given(m, model, cfg.epsilon);
        trace.cost_per_iteration.push_back(cost);
        trace.iterations_run = k + 1;
        if (cfg.rel_tol > 0.0 && k > 0 && prev - cost < cfg.rel_tol * std::max(prev, 1e-300))
            break;
        prev = cost;
    }
    return trace;
}

/// Learns one note template by rank-one convolutive factorization of the
/// note's spectrogram. Returns the normalized n x tau template (unit total
/// mass) and the fit trace; the training activation is discarded.
inline std::pair<TemplateTensor, FitTrace> train_note_template(const Matrix& v, std::size_t tau,
                                                               const SolverConfig& cfg = {}) {
    require_nonnegative(v, "train_note_template");
    if (max_value(v) <= 0.0)
        fail(Errc::untrainable_note, "train_note_template: all-zero spectrogram");
    auto [w, h] = init_template(v, tau);
    FitTrace trace = fit_cnmf(v, w, h, cfg);
    normalize_templates(w, h); // W already unit mass after fit; cheap no-op guard
    return {std::move(w), std::move(trace)};
}

/// Solves the fixed-dictionary activation problem for a spectrogram M.
/// H is warm-started with a short plain-NMF run restricted to the first
/// slice of each template, then refined with the full convolutive updates.
inline std::pair<Matrix, FitTrace> transcribe_activations(
    const Matrix& m, const TemplateTensor& w, const SolverConfig& cfg = {.max_iters = 100}) {
    if (m.rows() != w.n)
        fail(Errc::shape_mismatch, "transcribe_activations: spectrogram has " +
                                       std::to_string(m.rows()) + " bins, templates have " +
                                       std::to_string(w.n));
    require_nonnegative(m, "transcribe_activations");

    const std::size_t mm = m.cols();
    const double scale = l1_norm(m) / (static_cast<double>(w.n) * mm * w.r);
    Matrix h(w.r, mm, scale);

    // Warm start: 10 plain-NMF activation updates against the first template
    // slices (a tau=1 view of the dictionary).
    TemplateTensor first(w.n, 1, w.r);
    for (std::size_t q = 0; q < w.r; ++q) {
        auto dst = first.slice(q, 0);
        auto src = w.slice(q, 0);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    Matrix model(w.n, mm);
    for (int k = 0; k < 10; ++k) {
        detail::apply_into(first, h, model);
        detail::update_h_with_model(m, model, first, h, cfg.epsilon);
    }

    FitTrace trace = solve_activations(m, w, h, cfg);
    return {std::move(h), std::move(trace)};
}

} // namespace cnmft
