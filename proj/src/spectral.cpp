#include "svitorus/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "svitorus/fft.hpp"

namespace svt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void forward_nd(std::vector<std::complex<double>>& buf, const PeriodicGrid& g) {
    if (g.d == 1) {
        fft::forward(buf.data(), g.n);
    } else {
        fft::forward2d(buf.data(), g.n);
    }
    const double scale = 1.0 / static_cast<double>(g.size());
    for (auto& z : buf) z *= scale;
}

void inverse_nd(std::vector<std::complex<double>>& buf, const PeriodicGrid& g) {
    if (g.d == 1) {
        fft::inverse(buf.data(), g.n);
    } else {
        fft::inverse2d(buf.data(), g.n);
    }
}

}  // namespace

void to_spectrum(const ScalarField& f, std::vector<std::complex<double>>& out) {
    const PeriodicGrid& g = f.grid();
    out.resize(g.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i];
    forward_nd(out, g);
}

void from_spectrum(const PeriodicGrid& g, const std::vector<std::complex<double>>& modes,
                   ScalarField& out) {
    std::vector<std::complex<double>> buf = modes;
    inverse_nd(buf, g);
    out = ScalarField(g);
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
}

Spectrum dft(const ScalarField& f) {
    if (!f.all_finite()) throw std::invalid_argument("dft: non-finite input values");
    Spectrum s;
    s.grid = f.grid();
    to_spectrum(f, s.modes);
    return s;
}

ScalarField idft(const Spectrum& s) {
    ScalarField f;
    from_spectrum(s.grid, s.modes, f);
    return f;
}

VectorField gradient(const ScalarField& f) {
    const PeriodicGrid& g = f.grid();
    std::vector<std::complex<double>> base;
    to_spectrum(f, base);
    VectorField out(g, g.d);
    std::vector<std::complex<double>> buf(base.size());
    const int n = g.n;
    for (int axis = 0; axis < g.d; ++axis) {
        if (g.d == 1) {
            for (int k = 0; k < n; ++k) {
                buf[static_cast<std::size_t>(k)] =
                    std::complex<double>(0.0, kTwoPi * wavenumber(k, n)) * base[static_cast<std::size_t>(k)];
            }
        } else {
            for (int k0 = 0; k0 < n; ++k0) {
                const double w0 = wavenumber(k0, n);
                for (int k1 = 0; k1 < n; ++k1) {
                    const double w = axis == 0 ? w0 : wavenumber(k1, n);
                    buf[static_cast<std::size_t>(k0) * n + k1] =
                        std::complex<double>(0.0, kTwoPi * w) * base[static_cast<std::size_t>(k0) * n + k1];
                }
            }
        }
        from_spectrum(g, buf, out.comp(axis));
    }
    return out;
}

namespace {

ScalarField divergence_impl(const VectorField& v, bool dealias) {
    const PeriodicGrid& g = v.grid();
    if (v.components() != g.d) throw std::invalid_argument("divergence: need d components");
    const int n = g.n;
    const double cutoff = static_cast<double>(n) / 3.0;
    std::vector<std::complex<double>> acc(g.size(), {0.0, 0.0});
    std::vector<std::complex<double>> buf;
    for (int axis = 0; axis < g.d; ++axis) {
        to_spectrum(v.comp(axis), buf);
        if (g.d == 1) {
            for (int k = 0; k < n; ++k) {
                const double w = wavenumber(k, n);
                if (dealias && std::abs(w) > cutoff) continue;
                acc[static_cast<std::size_t>(k)] +=
                    std::complex<double>(0.0, kTwoPi * w) * buf[static_cast<std::size_t>(k)];
            }
        } else {
            for (int k0 = 0; k0 < n; ++k0) {
                const double w0 = wavenumber(k0, n);
                for (int k1 = 0; k1 < n; ++k1) {
                    const double w1 = wavenumber(k1, n);
                    if (dealias && (std::abs(w0) > cutoff || std::abs(w1) > cutoff)) continue;
                    const double w = axis == 0 ? w0 : w1;
                    acc[static_cast<std::size_t>(k0) * n + k1] +=
                        std::complex<double>(0.0, kTwoPi * w) * buf[static_cast<std::size_t>(k0) * n + k1];
                }
            }
        }
    }
    ScalarField out;
    from_spectrum(g, acc, out);
    return out;
}

}  // namespace

ScalarField divergence(const VectorField& v) { return divergence_impl(v, false); }
ScalarField divergence_dealiased(const VectorField& v) { return divergence_impl(v, true); }

ScalarField laplacian(const ScalarField& f) {
    const PeriodicGrid& g = f.grid();
    std::vector<std::complex<double>> buf;
    to_spectrum(f, buf);
    const int n = g.n;
    if (g.d == 1) {
        for (int k = 0; k < n; ++k) {
            const double w = kTwoPi * wavenumber(k, n);
            buf[static_cast<std::size_t>(k)] *= -w * w;
        }
    } else {
        for (int k0 = 0; k0 < n; ++k0) {
            const double w0 = kTwoPi * wavenumber(k0, n);
            for (int k1 = 0; k1 < n; ++k1) {
                const double w1 = kTwoPi * wavenumber(k1, n);
                buf[static_cast<std::size_t>(k0) * n + k1] *= -(w0 * w0 + w1 * w1);
            }
        }
    }
    ScalarField out;
    from_spectrum(g, buf, out);
    return out;
}

double inner_H(const ScalarField& f, const ScalarField& g) {
    f.check_same_grid(g);
    KahanSum acc;
    for (std::size_t i = 0; i < f.size(); ++i) acc.add(f[i] * g[i]);
    return acc.sum * f.grid().cell_measure();
}

double norm_H2(const ScalarField& f) { return inner_H(f, f); }

double integral(const ScalarField& f) {
    KahanSum acc;
    for (std::size_t i = 0; i < f.size(); ++i) acc.add(f[i]);
    return acc.sum * f.grid().cell_measure();
}

VectorField apply_matrix(const MatrixField& m, const VectorField& v) {
    if (m.cols() != v.components()) throw std::invalid_argument("apply_matrix: shape mismatch");
    if (!(m.grid() == v.grid())) throw std::invalid_argument("apply_matrix: grid mismatch");
    VectorField out(m.grid(), m.rows());
    const std::size_t size = m.grid().size();
    for (int i = 0; i < m.rows(); ++i) {
        double* o = out.comp(i).data();
        for (int j = 0; j < m.cols(); ++j) {
            const double* mij = m.entry(i, j).data();
            const double* vj = v.comp(j).data();
            for (std::size_t p = 0; p < size; ++p) o[p] += mij[p] * vj[p];
        }
    }
    return out;
}

VectorField apply_matrix_transposed(const MatrixField& m, const VectorField& v) {
    if (m.rows() != v.components()) throw std::invalid_argument("apply_matrix_transposed: shape mismatch");
    if (!(m.grid() == v.grid())) throw std::invalid_argument("apply_matrix_transposed: grid mismatch");
    VectorField out(m.grid(), m.cols());
    const std::size_t size = m.grid().size();
    for (int j = 0; j < m.cols(); ++j) {
        double* o = out.comp(j).data();
        for (int i = 0; i < m.rows(); ++i) {
            const double* mij = m.entry(i, j).data();
            const double* vi = v.comp(i).data();
            for (std::size_t p = 0; p < size; ++p) o[p] += mij[p] * vi[p];
        }
    }
    return out;
}

double dirichlet_form(const ScalarField& u, const ScalarField& v, const MatrixField& ell) {
    const VectorField gu = apply_matrix(ell, gradient(u));
    const VectorField gv = apply_matrix(ell, gradient(v));
    KahanSum acc;
    const std::size_t size = u.grid().size();
    for (int c = 0; c < gu.components(); ++c) {
        const double* a = gu.comp(c).data();
        const double* b = gv.comp(c).data();
        for (std::size_t p = 0; p < size; ++p) acc.add(a[p] * b[p]);
    }
    return acc.sum * u.grid().cell_measure();
}

}  // namespace svt
