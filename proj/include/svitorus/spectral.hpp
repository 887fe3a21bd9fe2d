#pragma once

#include <complex>
#include <vector>

#include "svitorus/field.hpp"

namespace svt {

/// Fourier modes of a real grid function, normalized so that a constant field c
/// has mode 0 equal to c. Mode layout matches FFT index order: frequency k at
/// index k for k < n/2, and k - n for k >= n/2 (row-major over axes for d=2).
struct Spectrum {
    PeriodicGrid grid;
    std::vector<std::complex<double>> modes;
};

/// Integer frequency of FFT index idx; the Nyquist index n/2 maps to 0 so that
/// spectral derivatives are exactly skew-adjoint on the grid.
inline double wavenumber(int idx, int n) {
    if (idx == n / 2) return 0.0;
    return idx < n / 2 ? static_cast<double>(idx) : static_cast<double>(idx - n);
}

Spectrum dft(const ScalarField& f);
ScalarField idft(const Spectrum& s);

/// Low-level buffer variants used on hot paths (buffer sized grid.size()).
void to_spectrum(const ScalarField& f, std::vector<std::complex<double>>& out);
void from_spectrum(const PeriodicGrid& g, const std::vector<std::complex<double>>& modes,
                   ScalarField& out);

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
ScalarField laplacian(const ScalarField& f);

/// Divergence with the 2/3-rule applied to the input components first
/// (modes with any |k_j| > n/3 dropped). Used after pointwise nonlinearities.
ScalarField divergence_dealiased(const VectorField& v);

/// L2(T^d) inner product by quadrature, h^d * sum f*g (compensated summation).
double inner_H(const ScalarField& f, const ScalarField& g);
double norm_H2(const ScalarField& f);
double integral(const ScalarField& f);

/// Dirichlet form h^d * sum <ell grad u, ell grad v> for a matrix field ell.
double dirichlet_form(const ScalarField& u, const ScalarField& v, const MatrixField& ell);

/// Kahan-compensated accumulator for deterministic reductions.
struct KahanSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double value) {
        const double y = value - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

}  // namespace svt
