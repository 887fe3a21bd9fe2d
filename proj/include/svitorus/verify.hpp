#pragma once

#include <cstdint>
#include <vector>

#include "svitorus/simulator.hpp"

namespace svt {

/// Band-limited random field (modes <= n/4) scaled to the requested H^1 norm.
ScalarField random_band_limited_field(const PeriodicGrid& g, std::uint64_t seed,
                                      double s_norm = 1.0);

/// Monte-Carlo check of the energy bound: for every recorded t,
/// E||X_t||^2 + 2 E sum_{s<t} [Psi^lambda(X_s) + eps form_A(X_s)] dt <= E||x||^2.
/// left is the max over t of the running combination; M = cfg.paths.
VerifyReport verify_energy_bound(const ScalarField& x, const SolverConfig& cfg,
                                 const OperatorSet& ops, const ConvexPotential& P);

/// A-priori H^1 bound with measured constants K_hat (curvature) and c_hat
/// (commutator defect). The report carries the growth factor actually used;
/// the "uses measured constants" caveat is recorded in the notes.
VerifyReport verify_apriori_bound(const ScalarField& x, const SolverConfig& cfg,
                                  const OperatorSet& ops, const ConvexPotential& P, double K_hat,
                                  double c_hat);

/// Synchronous-coupling contraction: sup_t E||X_t - Y_t||^2 <= E||x - y||^2.
VerifyReport verify_contraction(const ScalarField& x, const ScalarField& y,
                                const SolverConfig& cfg, const OperatorSet& ops,
                                const ConvexPotential& P);

struct RateStudyResult {
    VerifyReport report;
    std::vector<double> abscissa;  // (p1+p2) for lambda/eps, |d1-d2|^(1/2) for delta
    std::vector<double> errors;    // sup_t E||X^1_t - X^2_t||^2 per consecutive pair
    double slope = 0.0;
};

RateStudyResult rate_study_lambda(const ScalarField& x, const SolverConfig& cfg,
                                  const OperatorSet& ops, const ConvexPotential& P,
                                  const std::vector<double>& lambdas);
RateStudyResult rate_study_delta(const ScalarField& x, const SolverConfig& cfg,
                                 const OperatorSet& ops, const ConvexPotential& P,
                                 const std::vector<double>& deltas);
RateStudyResult rate_study_eps(const ScalarField& x, const SolverConfig& cfg,
                               const OperatorSet& ops, const ConvexPotential& P,
                               const std::vector<double>& epss);

/// Weak defective commutation constant: minimum over random band-limited f and
/// beta of beta <beta G_beta b grad f - beta b grad G_beta f, b grad f> / form_A(f,f).
/// Pass iff c_hat <= abs_tol and the per-beta minima are stable on the top half
/// of the beta list.
VerifyReport estimate_wdc_constant(const OperatorSet& ops, const std::vector<double>& betas,
                                   int samples, std::uint64_t seed, double* c_hat_out = nullptr);

/// Semigroup gradient estimate |a grad P_t f| <= e^{-2 K t} P_t |a grad f| with
/// P_t approximated by `substeps` backward-Euler resolvent steps (>= 64).
/// Reports the largest admissible K_hat; pass iff K_hat is finite.
VerifyReport verify_gradient_estimate(const OperatorSet& ops, int f_samples,
                                      const std::vector<double>& t_list, int substeps,
                                      std::uint64_t seed, double* K_hat_out = nullptr);

/// Discrete potential contraction of the shifted resolvent:
/// Psi~(J_delta^0 u) <= (1 + 1e-6) Psi~(u) on random band-limited u, where
/// J_delta^0 uses L^a + 2 min(K_hat, 0).
VerifyReport verify_resolvent_potential_contraction(const OperatorSet& ops,
                                                    const ConvexPotential& P, double delta,
                                                    double K_hat, int samples,
                                                    std::uint64_t seed);

enum class SviElementKind { self_test, zero, heat_flow };

/// Admissible test elements (Z0, Z, G, P) for the variational inequality; Z
/// satisfies its Ito identity by construction (recorded from the simulator).
struct SviTestElements {
    ScalarField Z0;
    std::vector<ScalarField> Z;  // step-indexed states, size steps+1
    std::vector<ScalarField> G;  // step-indexed drift records, size steps
    enum class PTag { identity, resolvent_Ja } p_tag = PTag::identity;
    double delta = 0.0;  // resolvent parameter when p_tag is resolvent_Ja
};

SviTestElements make_svi_elements(SviElementKind kind, const ScalarField& x,
                                  const SolverConfig& cfg, const OperatorSet& ops,
                                  const ConvexPotential& P, int path_index);

/// Evaluates both sides of the variational inequality along one recorded
/// trajectory (stderr 0); X must carry per-step states.
VerifyReport verify_svi_inequality(const Trajectory& X, const SviTestElements& elems,
                                   const SolverConfig& cfg, const OperatorSet& ops,
                                   const ConvexPotential& P);

/// Monte-Carlo version across cfg.paths coupled paths.
VerifyReport verify_svi_mc(const ScalarField& x, const SolverConfig& cfg, const OperatorSet& ops,
                           const ConvexPotential& P, SviElementKind kind);

}  // namespace svt
