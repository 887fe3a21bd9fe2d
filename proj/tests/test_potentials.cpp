#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "svitorus/potentials.hpp"

using namespace svt;

namespace {

// Independent oracle: golden-section minimization of the Moreau objective with
// a derivative-free parabolic refinement. No derivative information and no
// optimality-residual solve, i.e. a different route than the implementation.
double prox_oracle(const ConvexPotential& p, double r, double lambda) {
    auto objective = [&](double s) {
        const double d = r - s;
        return p.theta(s) + d * d / (2.0 * lambda);
    };
    double lo = 0.0, hi = std::max(r, 1e-30);
    const double invphi = 0.6180339887498948482;
    double c = hi - invphi * (hi - lo);
    double d = lo + invphi * (hi - lo);
    double fc = objective(c), fd = objective(d);
    for (int it = 0; it < 120; ++it) {
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
    double best = 0.5 * (lo + hi);
    if (best < 1e-13 * std::max(1.0, r)) return 0.0;  // boundary minimum
    // Parabolic vertex through (best-h, best, best+h), shrinking h.
    for (double h = 1e-4 * std::max(1.0, r); h > 1e-11; h *= 1e-2) {
        const double a = std::max(0.0, best - h);
        const double b = std::min(r, best + h);
        const double m = 0.5 * (a + b);
        const double fa = objective(a), fm = objective(m), fb = objective(b);
        // Stop once the sampled differences drop into rounding noise.
        if (std::abs(fm - fa) + std::abs(fm - fb) < 1e-13 * std::max(1.0, std::abs(fm))) break;
        const double num = (m - a) * (m - a) * (fm - fb) - (m - b) * (m - b) * (fm - fa);
        const double den = (m - a) * (fm - fb) - (m - b) * (fm - fa);
        if (den == 0.0) break;
        const double vertex = m - 0.5 * num / den;
        if (vertex >= a && vertex <= b) best = vertex;
    }
    // Boundary minimum, including the flat kiss case where f(0) - f(best) is
    // below the resolvable objective difference.
    if (objective(0.0) <= objective(best) * (1.0 + 1e-14)) return 0.0;
    return std::clamp(best, 0.0, r);
}

std::vector<ConvexPotential> catalog() {
    std::vector<ConvexPotential> out;
    for (const auto& key : potential_catalog_keys()) out.push_back(make_potential(key));
    return out;
}

}  // namespace

TEST_CASE("eval_psi basic values") {
    auto p1 = make_potential("p-laplace:1");
    std::array<double, 2> z34{3.0, 4.0};
    CHECK(eval_psi(p1, z34) == doctest::Approx(5.0));

    auto p2 = make_potential("p-laplace:2");
    std::array<double, 2> z11{1.0, 1.0};
    CHECK(eval_psi(p2, z11) == doctest::Approx(1.0));

    auto ms = make_potential("minimal-surface");
    std::array<double, 2> z0{0.0, 0.0};
    CHECK(eval_psi(ms, z0) == doctest::Approx(1.0));
}

TEST_CASE("eval_psi is radial") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const auto& p : catalog()) {
        for (int it = 0; it < 50; ++it) {
            std::array<double, 2> z{u(rng), u(rng)};
            const double r = std::hypot(z[0], z[1]);
            std::array<double, 2> zr{r, 0.0};
            CHECK(eval_psi(p, z) == doctest::Approx(eval_psi(p, zr)).epsilon(1e-12));
        }
    }
}

TEST_CASE("eval_psi rejects non-finite input") {
    auto p = make_potential("p-laplace:2");
    std::array<double, 2> z{1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(eval_psi(p, z), std::invalid_argument);
}

TEST_CASE("scalar prox values against the golden-section oracle") {
    auto p2 = make_potential("p-laplace:2");
    CHECK(scalar_prox(p2, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(prox_oracle(p2, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-9));

    auto p1 = make_potential("p-laplace:1");
    CHECK(scalar_prox(p1, 0.5, 1.0) == doctest::Approx(0.0));
    CHECK(prox_oracle(p1, 0.5, 1.0) == doctest::Approx(0.0).epsilon(1e-9));

    for (const auto& p : catalog()) {
        CHECK(scalar_prox(p, 0.0, 0.7) == doctest::Approx(0.0));
    }
    CHECK_THROWS_AS(scalar_prox(p2, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(scalar_prox(p2, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("prox matches oracle across the catalog and stays in [0,r]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ur(0.0, 5.0);
    std::uniform_real_distribution<double> ul(-3.0, 0.5);
    for (const auto& p : catalog()) {
        for (int it = 0; it < 60; ++it) {
            const double r = ur(rng);
            const double lambda = std::pow(10.0, ul(rng));
            const double s = scalar_prox(p, r, lambda);
            const double s_oracle = prox_oracle(p, r, lambda);
            CHECK(s >= 0.0);
            CHECK(s <= r + 1e-14);
            CHECK(s == doctest::Approx(s_oracle).epsilon(1e-7).scale(std::max(1.0, r)));
        }
    }
}

TEST_CASE("closed-form prox agrees with the oracle to 1e-9") {
    auto p2 = make_potential("p-laplace:2");
    auto p1 = make_potential("p-laplace:1");
    for (double r : {0.1, 0.7, 1.3, 4.0}) {
        for (double lambda : {1e-3, 1e-1, 1.0}) {
            CHECK(std::abs(scalar_prox(p2, r, lambda) - prox_oracle(p2, r, lambda)) < 1e-9);
            CHECK(std::abs(scalar_prox(p1, r, lambda) - prox_oracle(p1, r, lambda)) < 1e-9);
        }
    }
}

TEST_CASE("prox firm nonexpansiveness on random pairs") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ur(0.0, 4.0);
    for (const auto& p : catalog()) {
        for (int it = 0; it < 200; ++it) {
            const double r1 = ur(rng), r2 = ur(rng);
            const double s1 = scalar_prox(p, r1, 0.3);
            const double s2 = scalar_prox(p, r2, 0.3);
            CHECK(std::abs(s1 - s2) <= std::abs(r1 - r2) + 1e-9);
        }
    }
}

TEST_CASE("yosida gradient closed forms") {
    auto tv = make_potential("p-laplace:1");
    const double lambda = 0.5;
    // |zeta| <= lambda: zeta / lambda.
    std::array<double, 2> small{0.1, 0.2};
    auto g = yosida_grad(tv, small, lambda);
    CHECK(g[0] == doctest::Approx(small[0] / lambda).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(small[1] / lambda).epsilon(1e-12));
    // |zeta| > lambda: unit vector.
    std::array<double, 2> big{3.0, 4.0};
    g = yosida_grad(tv, big, lambda);
    CHECK(g[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(0.8).epsilon(1e-12));

    auto p2 = make_potential("p-laplace:2");
    std::array<double, 2> z{1.5, -2.0};
    g = yosida_grad(p2, z, lambda);
    CHECK(g[0] == doctest::Approx(z[0] / (1.0 + lambda)).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(z[1] / (1.0 + lambda)).epsilon(1e-12));

    for (const auto& p : catalog()) {
        std::array<double, 2> zero{0.0, 0.0};
        auto gz = yosida_grad(p, zero, 0.2);
        CHECK(gz[0] == 0.0);
        CHECK(gz[1] == 0.0);
    }
}

TEST_CASE("yosida monotonicity and Lipschitz bound on random pairs") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const double lambda = 0.2;
    for (const auto& p : catalog()) {
        for (int it = 0; it < 10000 / 6; ++it) {
            std::array<double, 2> z1{u(rng), u(rng)};
            std::array<double, 2> z2{u(rng), u(rng)};
            auto g1 = yosida_grad(p, z1, lambda);
            auto g2 = yosida_grad(p, z2, lambda);
            const double dot = (g1[0] - g2[0]) * (z1[0] - z2[0]) + (g1[1] - g2[1]) * (z1[1] - z2[1]);
            const double dz = std::hypot(z1[0] - z2[0], z1[1] - z2[1]);
            const double dg = std::hypot(g1[0] - g2[0], g1[1] - g2[1]);
            CHECK(dot >= -1e-7 * dz);
            CHECK(dg <= dz / lambda * (1.0 + 1e-6) + 1e-9);
        }
    }
}

TEST_CASE("moreau values") {
    auto tv = make_potential("p-laplace:1");
    std::array<double, 1> z2{2.0};
    CHECK(moreau_eval(tv, z2, 1.0) == doctest::Approx(1.5).epsilon(1e-12));

    auto p2 = make_potential("p-laplace:2");
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int it = 0; it < 30; ++it) {
        std::array<double, 2> z{u(rng), u(rng)};
        const double r2 = z[0] * z[0] + z[1] * z[1];
        for (double lambda : {0.01, 0.3, 2.0}) {
            CHECK(moreau_eval(p2, z, lambda) ==
                  doctest::Approx(r2 / (2.0 * (1.0 + lambda))).epsilon(1e-11));
        }
    }
}

TEST_CASE("moreau envelope below psi, increasing as lambda decreases, O(lambda) error") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (const auto& p : catalog()) {
        double c_hat = 0.0;
        for (int it = 0; it < 40; ++it) {
            std::array<double, 2> z{u(rng), u(rng)};
            const double psi = eval_psi(p, z);
            double prev = -1.0;
            for (double lambda : {1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001}) {
                const double ml = moreau_eval(p, z, lambda);
                CHECK(ml <= psi + 1e-10);
                CHECK(ml >= prev - 1e-10);  // non-decreasing as lambda decreases
                CHECK(ml >= -1e-12);
                prev = ml;
                c_hat = std::max(c_hat, (psi - ml) / (lambda * (1.0 + psi)));
            }
        }
        // Single finite constant C_hat with |psi - psi^lambda| <= C lambda (1 + psi).
        CHECK(c_hat < 50.0);
    }
}

TEST_CASE("envelope gradient identity against central differences") {
    const double lambda = 0.25;
    const double h = 1e-6;
    for (const auto& p : catalog()) {
        for (std::array<double, 2> z : {std::array<double, 2>{0.8, -0.4},
                                        std::array<double, 2>{2.0, 1.0},
                                        std::array<double, 2>{-1.2, 0.9}}) {
            auto g = yosida_grad(p, z, lambda);
            for (int axis = 0; axis < 2; ++axis) {
                auto zp = z, zm = z;
                zp[static_cast<std::size_t>(axis)] += h;
                zm[static_cast<std::size_t>(axis)] -= h;
                const double fd = (moreau_eval(p, zp, lambda) - moreau_eval(p, zm, lambda)) / (2.0 * h);
                const double scale = std::max(1.0, std::abs(g[static_cast<std::size_t>(axis)]));
                CHECK(std::abs(fd - g[static_cast<std::size_t>(axis)]) < 1e-6 * scale);
            }
        }
    }
}

TEST_CASE("condition N scan: doubling constants") {
    for (double p : {1.0, 1.3, 1.7, 2.0}) {
        auto pot = make_potential("p-laplace:" + std::to_string(p));
        auto rep = verify_condition_N(pot, 20.0, 400);
        CHECK(rep.pass);
        CHECK(rep.constants_used.at("K_hat") == doctest::Approx(std::pow(2.0, p)).epsilon(1e-9));
    }
    auto ms = verify_condition_N(make_potential("minimal-surface"), 20.0, 400);
    CHECK(ms.pass);
    CHECK(ms.constants_used.at("K_hat") <= 4.0);

    for (const auto& key : potential_catalog_keys()) {
        CHECK(verify_condition_N(make_potential(key), 20.0, 400).pass);
    }
}

TEST_CASE("condition N rejects exponential growth") {
    ConvexPotential expo;
    expo.name = "exp-minus-one";
    expo.theta = [](double r) { return std::expm1(r); };
    expo.theta_prime = [](double r) { return std::exp(r); };
    auto rep = verify_condition_N(expo, 20.0, 400);
    CHECK_FALSE(rep.pass);
}

TEST_CASE("subgradient bound check") {
    auto r2 = subgrad_bound_check(make_potential("p-laplace:2"), 200);
    CHECK(r2.pass);
    CHECK(r2.constants_used.at("max_ratio") == doctest::Approx(2.0).epsilon(1e-9));

    auto r1 = subgrad_bound_check(make_potential("p-laplace:1"), 200);
    CHECK(r1.pass);
    CHECK(r1.constants_used.at("max_ratio") == doctest::Approx(1.0).epsilon(1e-9));

    auto cs = subgrad_bound_check(make_potential("curve-shortening"), 200);
    CHECK(cs.pass);
    CHECK(cs.left <= cs.right + 1e-9);
}

TEST_CASE("yosida lipschitz estimate used for CFL") {
    CHECK(make_potential("p-laplace:2").yosida_lipschitz(0.5) == doctest::Approx(1.0 / 1.5));
    CHECK(make_potential("p-laplace:1").yosida_lipschitz(0.5) == doctest::Approx(2.0));
    CHECK(make_potential("minimal-surface").yosida_lipschitz(0.25) == doctest::Approx(0.8));
}
