#include "svitorus/potentials.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace svt {

namespace {

double parse_p(const std::string& key) {
    const double p = std::stod(key.substr(std::string("p-laplace:").size()));
    if (!(p >= 1.0 && p <= 2.0)) {
        throw std::invalid_argument("p-laplace exponent must lie in [1,2], got " + std::to_string(p));
    }
    return p;
}

// Golden-section bracket on the Moreau objective followed by a Newton polish
// on the optimality residual F(s) = s - r + lambda*theta'(s), which is
// monotone increasing for convex theta.
double numeric_prox(const ConvexPotential& p, double r, double lambda) {
    const auto objective = [&](double s) {
        const double d = r - s;
        return p.theta(s) + d * d / (2.0 * lambda);
    };
    const auto residual = [&](double s) { return s - r + lambda * p.theta_prime(s); };

    if (residual(0.0) >= 0.0) return 0.0;  // minimum pinned at the origin
    double lo = 0.0, hi = r;
    const double invphi = 0.6180339887498948482;
    double c = hi - invphi * (hi - lo);
    double d = lo + invphi * (hi - lo);
    double fc = objective(c), fd = objective(d);
    const double width_tol = 1e-6 * std::max(1.0, r);
    while (hi - lo > width_tol) {
        if (fc < fd) {
            hi = d; d = c; fd = fc;
            c = hi - invphi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c; c = d; fc = fd;
            d = lo + invphi * (hi - lo);
            fd = objective(d);
        }
    }
    // Newton polish with bisection safeguard inside a residual sign bracket.
    double a = std::max(0.0, lo - width_tol), b = std::min(r, hi + width_tol);
    if (residual(a) > 0.0) a = 0.0;
    if (residual(b) < 0.0) b = r;
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const double f = residual(s);
        if (std::abs(f) < 1e-12 * std::max(1.0, r)) break;
        if (f > 0.0) b = s; else a = s;
        const double h = 1e-7 * std::max(1.0, s);
        const double df = 1.0 + lambda * (p.theta_prime(s + h) - p.theta_prime(std::max(0.0, s - h))) /
                                     (s + h - std::max(0.0, s - h));
        double next = df > 0.0 ? s - f / df : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - s) < 1e-16 * std::max(1.0, r)) { s = next; break; }
        s = next;
    }
    return std::clamp(s, 0.0, r);
}

std::vector<double> log_linear_grid(double r_max, int samples) {
    // Half log-spaced near zero, half linear, sorted ascending.
    std::vector<double> rs;
    rs.reserve(static_cast<std::size_t>(samples));
    const int half = samples / 2;
    for (int i = 0; i < half; ++i) {
        rs.push_back(r_max * std::pow(10.0, -6.0 * (1.0 - static_cast<double>(i) / half)));
    }
    for (int i = 1; i <= samples - half; ++i) {
        rs.push_back(r_max * static_cast<double>(i) / (samples - half));
    }
    std::sort(rs.begin(), rs.end());
    return rs;
}

double norm_of(std::span<const double> zeta) {
    double sq = 0.0;
    for (double z : zeta) {
        if (!std::isfinite(z)) throw std::invalid_argument("potential: non-finite input");
        sq += z * z;
    }
    return std::sqrt(sq);
}

}  // namespace

ConvexPotential make_potential(const std::string& key) {
    ConvexPotential pot;
    pot.name = key;
    if (key.rfind("p-laplace:", 0) == 0) {
        const double p = parse_p(key);
        pot.theta = [p](double r) { return std::pow(r, p) / p; };
        pot.theta_prime = [p](double r) { return p > 1.0 ? std::pow(r, p - 1.0) : 1.0; };
        pot.growth_C = 1.0;
        pot.doubling_K = std::pow(2.0, p);
        if (p == 2.0) {
            pot.curvature_bound = 1.0;
            pot.closed_prox = [](double r, double lambda) { return r / (1.0 + lambda); };
        } else if (p == 1.0) {
            pot.closed_prox = [](double r, double lambda) { return std::max(r - lambda, 0.0); };
        }
        return pot;
    }
    if (key == "log-diffusion") {
        pot.theta = [](double r) { return (1.0 + r) * std::log1p(r) - r; };
        pot.theta_prime = [](double r) { return std::log1p(r); };
        pot.growth_C = 1.0;
        pot.doubling_K = 4.0;
        pot.curvature_bound = 1.0;
        return pot;
    }
    if (key == "minimal-surface") {
        pot.theta = [](double r) { return std::sqrt(1.0 + r * r); };
        pot.theta_prime = [](double r) { return r / std::sqrt(1.0 + r * r); };
        pot.growth_C = 1.0;
        pot.doubling_K = 4.0;
        pot.curvature_bound = 1.0;
        return pot;
    }
    if (key == "curve-shortening") {
        pot.theta = [](double r) { return r * std::atan(r) - 0.5 * std::log1p(r * r); };
        pot.theta_prime = [](double r) { return std::atan(r); };
        pot.growth_C = 2.0;
        pot.doubling_K = 4.0;
        pot.curvature_bound = 1.0;
        return pot;
    }
    throw std::invalid_argument("unknown potential key: " + key);
}

std::vector<std::string> potential_catalog_keys() {
    return {"p-laplace:1", "p-laplace:1.5", "p-laplace:2", "log-diffusion", "minimal-surface",
            "curve-shortening"};
}

double eval_psi(const ConvexPotential& p, std::span<const double> zeta) {
    return p.theta(norm_of(zeta));
}

double scalar_prox(const ConvexPotential& p, double r, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("scalar_prox: lambda must be positive");
    if (!(r >= 0.0)) throw std::invalid_argument("scalar_prox: radius must be non-negative");
    if (r == 0.0) return 0.0;
    if (p.closed_prox) return p.closed_prox(r, lambda);
    return numeric_prox(p, r, lambda);
}

double yosida_multiplier(const ConvexPotential& p, double r, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("yosida: lambda must be positive");
    if (r <= 0.0) return 0.0;
    return (r - scalar_prox(p, r, lambda)) / (lambda * r);
}

std::vector<double> yosida_grad(const ConvexPotential& p, std::span<const double> zeta,
                                double lambda) {
    const double r = norm_of(zeta);
    const double m = yosida_multiplier(p, r, lambda);
    std::vector<double> out(zeta.size());
    for (std::size_t i = 0; i < zeta.size(); ++i) out[i] = m * zeta[i];
    return out;
}

double moreau_eval_radial(const ConvexPotential& p, double r, double lambda) {
    const double s = scalar_prox(p, r, lambda);
    const double d = r - s;
    return p.theta(s) + d * d / (2.0 * lambda);
}

double moreau_eval(const ConvexPotential& p, std::span<const double> zeta, double lambda) {
    return moreau_eval_radial(p, norm_of(zeta), lambda);
}

VerifyReport verify_condition_N(const ConvexPotential& p, double r_max, int samples) {
    if (!(r_max > 0.0) || samples < 100) {
        throw std::invalid_argument("verify_condition_N: need r_max > 0 and samples >= 100");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> rs = log_linear_grid(r_max, samples);

    double k_full = 0.0, k_half = 0.0, c_full = 0.0, c_half = 0.0;
    for (double r : rs) {
        const double th = p.theta(r);
        const double growth = th / (1.0 + r * r);
        c_full = std::max(c_full, growth);
        if (r <= r_max / 2.0) c_half = std::max(c_half, growth);
        if (th > 0.0) {
            const double ratio = p.theta(2.0 * r) / th;
            k_full = std::max(k_full, ratio);
            if (r <= r_max / 2.0) k_half = std::max(k_half, ratio);
        }
    }

    // Convexity of sampled secants: slopes must be non-decreasing.
    double convexity_margin = 0.0;
    double prev_slope = -std::numeric_limits<double>::infinity();
    double prev_prime = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rs.size(); ++i) {
        const double slope = (p.theta(rs[i]) - p.theta(rs[i - 1])) / (rs[i] - rs[i - 1]);
        convexity_margin = std::min(convexity_margin, slope - prev_slope);
        prev_slope = slope;
        const double dp = p.theta_prime(rs[i]);
        convexity_margin = std::min(convexity_margin, dp - prev_prime);
        prev_prime = dp;
    }

    VerifyReport rep;
    rep.name = "condition-N:" + p.name;
    rep.left = k_full;
    rep.right = 1.05 * k_half + 1e-9;
    rep.abs_tol = 1e-9;
    rep.constants_used["K_hat"] = k_full;
    rep.constants_used["C_hat"] = c_full;
    rep.constants_used["theta0"] = p.theta(0.0);
    const double growth_margin = 1.05 * c_half + 1e-9 - c_full;
    const double doubling_margin = rep.right - rep.left;
    const bool finite = std::isfinite(k_full) && std::isfinite(c_full);
    rep.pass = finite && doubling_margin >= -rep.abs_tol && growth_margin >= -rep.abs_tol &&
               convexity_margin >= -1e-9;
    if (!rep.pass) {
        rep.notes = "doubling/growth scan unstable or convexity violated";
    }
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

VerifyReport subgrad_bound_check(const ConvexPotential& p, int samples) {
    if (samples < 100) throw std::invalid_argument("subgrad_bound_check: samples >= 100");
    const auto t0 = std::chrono::steady_clock::now();
    const double r_max = 10.0;
    VerifyReport scan = verify_condition_N(p, r_max, samples);
    const double k_hat = scan.constants_used.at("K_hat");

    double max_ratio = 0.0;
    for (double r : log_linear_grid(r_max, samples)) {
        const double th = p.theta(r);
        if (th <= 0.0) continue;
        max_ratio = std::max(max_ratio, r * p.theta_prime(r) / th);
    }

    VerifyReport rep;
    rep.name = "subgrad-bound:" + p.name;
    rep.left = max_ratio;
    rep.right = k_hat;
    rep.abs_tol = 1e-9;
    rep.constants_used["K_hat"] = k_hat;
    rep.constants_used["max_ratio"] = max_ratio;
    rep.finalize();
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace svt
