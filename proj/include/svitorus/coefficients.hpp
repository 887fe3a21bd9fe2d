#pragma once

#include <memory>
#include <string>
#include <vector>

#include "svitorus/report.hpp"
#include "svitorus/spectral.hpp"

namespace svt {

/// Coefficient fields a (d x d) and b (N x d) with spectrally computed first
/// and second derivatives cached at construction. Immutable afterwards.
class CoefficientSet {
public:
    /// tolerance: pointwise residual tolerance for the condition checkers
    /// (1e-8 for analytic/band-limited inputs, 1e-4 for sampled user data).
    CoefficientSet(MatrixField a, MatrixField b, double tolerance = 1e-8);

    /// Named example pairs: "identity", "killing", "paper-2.5",
    /// "paper-2.5-perturbed", "d1-transport:<beta0>".
    static CoefficientSet preset(const std::string& name, const PeriodicGrid& g);

    const PeriodicGrid& grid() const { return grid_; }
    int dim() const { return grid_.d; }
    int noise_dim() const { return b_.rows(); }
    const MatrixField& a() const { return a_; }
    const MatrixField& b() const { return b_; }
    /// Gram matrix field A = a* a (symmetric d x d), cached.
    const MatrixField& gram_a() const { return gram_a_; }
    /// Gram matrix field b* b, cached.
    const MatrixField& gram_b() const { return gram_b_; }
    double tolerance() const { return tolerance_; }

    /// d/dxi_k of a, as a d x d MatrixField; likewise for b (N x d).
    const MatrixField& da(int k) const { return da_[static_cast<std::size_t>(k)]; }
    const MatrixField& db(int k) const { return db_[static_cast<std::size_t>(k)]; }

    /// Measured ellipticity (smallest Gram eigenvalue over the grid); computed
    /// at construction, also reported by check_E.
    double kappa() const { return kappa_; }
    /// max over the grid of the largest eigenvalue of a* a.
    double gram_max_eig() const { return gram_max_eig_; }
    /// max over the grid of the largest eigenvalue of b* b.
    double gram_b_max_eig() const { return gram_b_max_eig_; }
    double b_sup_norm() const { return b_sup_; }

    /// Dirichlet forms h^d sum <a grad u, a grad v> and the b analogue.
    double form_A(const ScalarField& u, const ScalarField& v) const;
    double form_B(const ScalarField& u, const ScalarField& v) const;

private:
    PeriodicGrid grid_;
    MatrixField a_, b_;
    MatrixField gram_a_, gram_b_;
    std::vector<MatrixField> da_, db_;
    double tolerance_;
    double kappa_ = 0.0;
    double gram_max_eig_ = 0.0;
    double gram_b_max_eig_ = 0.0;
    double b_sup_ = 0.0;
};

/// (E): |a(xi) zeta|^2 >= kappa |zeta|^2. kappa is the grid minimum of the
/// smallest Gram eigenvalue; pass iff kappa > 1e-10.
ConditionReport check_E(const CoefficientSet& c);

/// (D): div b_i = 0 for every noise row, by spectral divergence.
ConditionReport check_D(const CoefficientSet& c);

/// (R): sum_k sum_p [b_ik (a_pl dk a_pj + a_pj dk a_pl)
///                   - a_pk (a_pj dk b_il + a_pl dk b_ij)] = 0 for all (l,j,i).
ConditionReport check_R(const CoefficientSet& c);

/// Sufficient curvature condition: sum_k sum_q [a_qj dk a_qi + a_qi dk a_qj] = 0
/// for all (i,j), i.e. sum_k dk (a*a)_ij = 0.
ConditionReport check_BE_sufficient(const CoefficientSet& c);

/// Killing identity: dj b_il + dl b_ij = 0 for all rows i and axes (l,j).
ConditionReport check_killing(const CoefficientSet& c);

}  // namespace svt
