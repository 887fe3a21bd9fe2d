#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "svitorus/grid.hpp"

namespace svt {

/// Real-valued grid function on the torus. Storage is row-major with axis 0
/// slowest: index = i0*n + i1 for d=2, index = i0 for d=1.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const PeriodicGrid& g, double fill = 0.0)
        : grid_(g), values_(g.size(), fill) {}
    ScalarField(const PeriodicGrid& g, std::vector<double> values)
        : grid_(g), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw std::invalid_argument("ScalarField: value count does not match grid");
        }
    }

    /// Samples fn(xi) at grid points; fn receives the d coordinates (x2 = 0 for d=1).
    static ScalarField sample(const PeriodicGrid& g,
                              const std::function<double(double, double)>& fn) {
        ScalarField f(g);
        if (g.d == 1) {
            for (int i = 0; i < g.n; ++i) f.values_[static_cast<std::size_t>(i)] = fn(g.coord(i), 0.0);
        } else {
            for (int i = 0; i < g.n; ++i) {
                for (int j = 0; j < g.n; ++j) {
                    f.values_[static_cast<std::size_t>(i) * g.n + j] = fn(g.coord(i), g.coord(j));
                }
            }
        }
        return f;
    }

    const PeriodicGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    /// Periodic accessor (indices taken mod n).
    double at_wrapped(int i0, int i1 = 0) const {
        const int n = grid_.n;
        i0 %= n; if (i0 < 0) i0 += n;
        i1 %= n; if (i1 < 0) i1 += n;
        return grid_.d == 1 ? values_[static_cast<std::size_t>(i0)]
                            : values_[static_cast<std::size_t>(i0) * n + i1];
    }

    bool all_finite() const {
        for (double v : values_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    ScalarField& operator+=(const ScalarField& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    ScalarField& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

    void axpy(double s, const ScalarField& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
    }

    void check_same_grid(const ScalarField& o) const {
        if (!(grid_ == o.grid_)) throw std::invalid_argument("ScalarField: grid mismatch");
    }

private:
    PeriodicGrid grid_;
    std::vector<double> values_;
};

/// m scalar components sharing one grid (m = d for gradients, m = N for noise channels).
class VectorField {
public:
    VectorField() = default;
    VectorField(const PeriodicGrid& g, int m) : grid_(g), comps_(static_cast<std::size_t>(m), ScalarField(g)) {
        if (m < 1) throw std::invalid_argument("VectorField: need at least one component");
    }
    explicit VectorField(std::vector<ScalarField> comps) : comps_(std::move(comps)) {
        if (comps_.empty()) throw std::invalid_argument("VectorField: empty component list");
        grid_ = comps_.front().grid();
        for (const auto& c : comps_) {
            if (!(c.grid() == grid_)) throw std::invalid_argument("VectorField: grid mismatch");
        }
    }

    const PeriodicGrid& grid() const { return grid_; }
    int components() const { return static_cast<int>(comps_.size()); }
    ScalarField& comp(int i) { return comps_[static_cast<std::size_t>(i)]; }
    const ScalarField& comp(int i) const { return comps_[static_cast<std::size_t>(i)]; }

private:
    PeriodicGrid grid_;
    std::vector<ScalarField> comps_;
};

/// r x c matrix of scalar fields on a shared grid; entry(i,j) is row i, column j.
class MatrixField {
public:
    MatrixField() = default;
    MatrixField(const PeriodicGrid& g, int rows, int cols)
        : grid_(g), rows_(rows), cols_(cols),
          entries_(static_cast<std::size_t>(rows) * cols, ScalarField(g)) {
        if (rows < 1 || cols < 1) throw std::invalid_argument("MatrixField: bad shape");
    }

    static MatrixField identity(const PeriodicGrid& g) {
        MatrixField m(g, g.d, g.d);
        for (int i = 0; i < g.d; ++i) m.entry(i, i) = ScalarField(g, 1.0);
        return m;
    }

    static MatrixField constant(const PeriodicGrid& g, const std::vector<std::vector<double>>& rows) {
        if (rows.empty() || rows.front().empty()) throw std::invalid_argument("MatrixField: empty matrix");
        MatrixField m(g, static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
        for (int i = 0; i < m.rows(); ++i) {
            if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != m.cols()) {
                throw std::invalid_argument("MatrixField: ragged matrix");
            }
            for (int j = 0; j < m.cols(); ++j) {
                m.entry(i, j) = ScalarField(g, rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            }
        }
        return m;
    }

    const PeriodicGrid& grid() const { return grid_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }

    ScalarField& entry(int i, int j) { return entries_[static_cast<std::size_t>(i) * cols_ + j]; }
    const ScalarField& entry(int i, int j) const {
        return entries_[static_cast<std::size_t>(i) * cols_ + j];
    }

    /// Row i as a VectorField with cols() components.
    VectorField row(int i) const {
        std::vector<ScalarField> comps;
        comps.reserve(static_cast<std::size_t>(cols_));
        for (int j = 0; j < cols_; ++j) comps.push_back(entry(i, j));
        return VectorField(std::move(comps));
    }

    bool all_finite() const {
        for (const auto& e : entries_) {
            if (!e.all_finite()) return false;
        }
        return true;
    }

private:
    PeriodicGrid grid_;
    int rows_ = 0;
    int cols_ = 0;
    std::vector<ScalarField> entries_;
};

/// Pointwise matrix-vector product (M v)(xi), shapes checked.
VectorField apply_matrix(const MatrixField& m, const VectorField& v);

/// Pointwise transposed product (M^T v)(xi); v must have m.rows() components.
VectorField apply_matrix_transposed(const MatrixField& m, const VectorField& v);

}  // namespace svt
