#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "svitorus/coefficients.hpp"
#include "svitorus/potentials.hpp"

namespace svt {

struct CgOptions {
    double tol = 1e-10;
    int max_iter = 500;
};

struct CgStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

using SpecBuf = std::vector<std::complex<double>>;

/// Dirichlet operators L^a, L^b, their resolvents, the smoothed noise map B^delta
/// and the regularized drift. Immutable after construction; all applies use
/// per-thread scratch, so concurrent calls are safe.
class OperatorSet {
public:
    OperatorSet(std::shared_ptr<const CoefficientSet> coeffs, CgOptions cg = {});

    const CoefficientSet& coeffs() const { return *coeffs_; }
    const PeriodicGrid& grid() const { return coeffs_->grid(); }
    const CgOptions& cg_options() const { return cg_; }

    /// L^a u = div(a* a grad u); self-adjoint, <L^a u, u> = -form_A(u, u).
    ScalarField apply_La(const ScalarField& u) const;
    /// L^b u = div(b* b grad u), applied in one pass (equals the channel sum
    /// under condition (D)).
    ScalarField apply_Lb(const ScalarField& u) const;

    /// J_delta^a u = (1 - delta L^a)^{-1} u by preconditioned CG (flat
    /// inverse-Helmholtz preconditioner). H- and form_A-contraction; mean exact.
    ScalarField resolvent_Ja(const ScalarField& u, double delta,
                             const ScalarField* initial_guess = nullptr,
                             CgStats* stats = nullptr) const;

    /// G_beta^a u = (beta - L^a)^{-1} u = (1/beta) J_{1/beta}^a u.
    ScalarField resolvent_Gbeta(const ScalarField& u, double beta,
                                const ScalarField* initial_guess = nullptr,
                                CgStats* stats = nullptr) const;

    /// Shifted resolvent (1 - delta (L^a + 2K))^{-1} with K <= 0, reduced to a
    /// rescaled J_delta^a.
    ScalarField resolvent_J0(const ScalarField& u, double delta, double K,
                             const ScalarField* initial_guess = nullptr,
                             CgStats* stats = nullptr) const;

    /// Noise map: component i is <b_i, grad J_delta^a u>; delta = 0 skips the
    /// smoothing resolvent.
    VectorField apply_B(const ScalarField& u, double delta) const;

    /// Right-hand-side drift div(a* phi^lambda(a grad u)) + eps L^a u
    /// + 1/2 J_delta^a L^b J_delta^a u (the negative of the paper-side operator).
    ScalarField apply_drift(const ScalarField& u, const ConvexPotential& P, double lambda,
                            double delta, double eps) const;

    // Spectral-domain entry points used by the time stepper to avoid redundant
    // transforms. Buffers hold normalized spectra of real fields.
    void to_spec(const ScalarField& u, SpecBuf& out) const;
    void from_spec(const SpecBuf& in, ScalarField& out) const;
    void La_spec(const SpecBuf& in, SpecBuf& out) const;
    void Lb_spec(const SpecBuf& in, SpecBuf& out) const;
    void solve_Ja_spec(const SpecBuf& rhs, double delta, SpecBuf& out, const SpecBuf* guess,
                       CgStats* stats) const;
    /// grad of a spectral field into physical components.
    void grad_spec(const SpecBuf& in, std::vector<std::vector<double>>& comps) const;
    /// Nonlinear drift part div(a* phi^lambda(a grad u)), dealiased, into
    /// out_hat; also reports the psi^lambda, psi and form_A quadratures of the
    /// input state when the pointers are given.
    void nonlinear_drift_spec(const SpecBuf& u_hat, const ConvexPotential& P, double lambda,
                              SpecBuf& out_hat, double* psi_quad, double* psi_plain_quad,
                              double* form_a_quad) const;

    /// Mean Gram trace / d; the flat diffusivity used by the preconditioner.
    double flat_diffusivity() const { return cbar_; }
    /// 4 pi^2 |k~|^2 per FFT mode index (Nyquist zeroed), grid-size entries.
    const std::vector<double>& laplace_symbol() const { return laplace_symbol_; }

private:
    std::shared_ptr<const CoefficientSet> coeffs_;
    CgOptions cg_;
    double cbar_ = 1.0;
    std::vector<double> laplace_symbol_;  // 4 pi^2 |k~|^2 per mode

    void div_gram_grad_spec(const SpecBuf& in, const MatrixField& gram, SpecBuf& out) const;
};

}  // namespace svt
