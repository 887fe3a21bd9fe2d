#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "svitorus/report.hpp"

namespace svt {

/// Radial convex potential psi(zeta) = theta(|zeta|) with theta(0+) finite,
/// theta convex non-decreasing, quadratic growth cap and doubling bound.
/// phi = d psi is only ever used through its Yosida regularization phi^lambda.
struct ConvexPotential {
    std::string name;
    std::function<double(double)> theta;        // theta(r), r >= 0
    std::function<double(double)> theta_prime;  // right derivative theta'_+(r)
    // Closed-form scalar prox argmin_s [theta(s) + (r-s)^2/(2 lambda)], if known.
    std::function<double(double, double)> closed_prox;
    double growth_C = 1.0;    // theta(r) <= C (1 + r^2)
    double doubling_K = 4.0;  // theta(2r) <= K theta(r)
    // sup theta'' when finite; infinity means the Yosida map is only 1/lambda-Lipschitz.
    double curvature_bound = std::numeric_limits<double>::infinity();

    /// Lipschitz constant of phi^lambda used for CFL checks and operator splitting.
    double yosida_lipschitz(double lambda) const {
        if (std::isfinite(curvature_bound)) {
            return curvature_bound / (1.0 + lambda * curvature_bound);
        }
        return 1.0 / lambda;
    }
};

/// Catalog lookup by config key: "p-laplace:<p>" with p in [1,2],
/// "log-diffusion", "minimal-surface", "curve-shortening".
ConvexPotential make_potential(const std::string& key);
std::vector<std::string> potential_catalog_keys();

/// psi(zeta) = theta(|zeta|).
double eval_psi(const ConvexPotential& p, std::span<const double> zeta);

/// argmin_{s>=0} [theta(s) + (r-s)^2/(2 lambda)]; in [0, r], non-decreasing in r.
double scalar_prox(const ConvexPotential& p, double r, double lambda);

/// Yosida-regularized gradient phi^lambda(zeta) = (zeta - prox(zeta)) / lambda.
std::vector<double> yosida_grad(const ConvexPotential& p, std::span<const double> zeta,
                                double lambda);

/// Scalar multiplier m(r) with phi^lambda(zeta) = m(|zeta|) * zeta. Hot-path form.
double yosida_multiplier(const ConvexPotential& p, double r, double lambda);

/// Moreau-Yosida value psi^lambda(zeta) = theta(s*) + (|zeta|-s*)^2/(2 lambda).
double moreau_eval(const ConvexPotential& p, std::span<const double> zeta, double lambda);
double moreau_eval_radial(const ConvexPotential& p, double r, double lambda);

/// Scans an r-grid for the doubling constant K_hat = max theta(2r)/theta(r),
/// the growth constant C_hat = max theta(r)/(1+r^2), and convexity of sampled
/// secants. Pass iff both constants are scan-stable (the full-range sup does
/// not exceed 1.05x the half-range sup) and the secant slopes are monotone.
VerifyReport verify_condition_N(const ConvexPotential& p, double r_max, int samples);

/// Checks the subgradient bound r*theta'(r) <= K_hat*theta(r) on a scan grid.
VerifyReport subgrad_bound_check(const ConvexPotential& p, int samples);

}  // namespace svt
