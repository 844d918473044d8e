#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cnmft/error.hpp"

namespace cnmft {

/// Dense row-major matrix of doubles. Spectrograms are stored with one row
/// per frequency bin (n x m); activations with one row per note (r x m).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool same_shape(const Matrix& o) const noexcept {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

    void fill(double v) { data_.assign(data_.size(), v); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double l1_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += std::abs(v);
    return s;
}

inline double max_value(const Matrix& m) {
    double best = 0.0;
    bool first = true;
    for (double v : m.data()) {
        if (first || v > best) { best = v; first = false; }
    }
    return best;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) fail(Errc::shape_mismatch, "max_abs_diff: shape mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
    return d;
}

/// Throws if any entry is negative or non-finite.
inline void require_nonnegative(const Matrix& m, const char* what) {
    for (double v : m.data())
        if (!(v >= 0.0) || !std::isfinite(v))
            fail(Errc::negative_entry, std::string(what) + ": negative or non-finite entry");
}

} // namespace cnmft
