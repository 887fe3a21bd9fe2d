#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "svitorus/rng.hpp"
#include "svitorus/simulator.hpp"

using namespace svt;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::shared_ptr<const CoefficientSet> coeffs(const std::string& name, const PeriodicGrid& g) {
    return std::make_shared<CoefficientSet>(CoefficientSet::preset(name, g));
}

std::shared_ptr<const CoefficientSet> coeffs_b0(const PeriodicGrid& g) {
    MatrixField a = MatrixField::identity(g);
    MatrixField b = MatrixField::constant(
        g, std::vector<std::vector<double>>(1, std::vector<double>(static_cast<std::size_t>(g.d), 0.0)));
    return std::make_shared<CoefficientSet>(std::move(a), std::move(b));
}

ScalarField single_mode(const PeriodicGrid& g, int k = 1, double amp = 1.0) {
    return ScalarField::sample(g, [k, amp](double x, double) { return amp * std::sin(2.0 * kPi * k * x); });
}

}  // namespace

TEST_CASE("config validation") {
    SolverConfig cfg;
    cfg.grid_d = 1;
    cfg.grid_n = 32;
    cfg.dt = 1e-3;
    cfg.horizon = 0.0101;  // not a multiple of dt
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.horizon = 0.01;
    CHECK(cfg.steps() == 10);
    cfg.lambda = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("noise path determinism, independence and moments") {
    NoisePath a(42, 0, 2, 500, 1e-3);
    NoisePath b(42, 0, 2, 500, 1e-3);
    CHECK(a.raw() == b.raw());
    NoisePath c(42, 1, 2, 500, 1e-3);
    CHECK(a.raw() != c.raw());
    NoisePath d(43, 0, 2, 500, 1e-3);
    CHECK(a.raw() != d.raw());

    // Moment sanity at M * steps >= 1e5 samples.
    const double dt = 4e-4;
    double sum = 0.0, sumsq = 0.0;
    std::size_t count = 0;
    for (int path = 0; path < 100; ++path) {
        NoisePath p(7, path, 1, 1000, dt);
        for (double w : p.raw()) {
            sum += w;
            sumsq += w * w;
            ++count;
        }
    }
    const double mean = sum / static_cast<double>(count);
    const double var = sumsq / static_cast<double>(count) - mean * mean;
    CHECK(std::abs(mean) < 4.0 * std::sqrt(dt) / std::sqrt(static_cast<double>(count)));
    CHECK(var == doctest::Approx(dt).epsilon(0.05));
}

TEST_CASE("explicit step: single-mode decay closed form") {
    PeriodicGrid g(1, 64);
    OperatorSet ops(coeffs_b0(g));
    auto p2 = make_potential("p-laplace:2");
    SolverConfig cfg;
    cfg.grid_d = 1;
    cfg.grid_n = 64;
    cfg.lambda = 0.1;
    cfg.delta = 1e-6;
    cfg.eps = 0.0;
    cfg.dt = 1e-5;
    cfg.horizon = 1e-5;
    cfg.scheme = Scheme::explicit_euler;
    ScalarField x = single_mode(g);
    std::vector<double> dw{0.0};
    ScalarField x1 = step(x, std::span<const double>(dw), cfg, ops, p2);
    const double factor = 1.0 - cfg.dt * 4.0 * kPi * kPi / (1.0 + cfg.lambda);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(x1[i] == doctest::Approx(factor * x[i]).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("constants are fixed points of the step for any noise") {
    PeriodicGrid g(2, 16);
    OperatorSet ops(coeffs("paper-2.5", g));
    auto tv = make_potential("p-laplace:1");
    SolverConfig cfg;
    cfg.grid_d = 2;
    cfg.grid_n = 16;
    cfg.lambda = 1e-2;
    cfg.delta = 1e-3;
    cfg.dt = 1e-4;
    cfg.horizon = 1e-4;
    cfg.scheme = Scheme::semi_implicit_split;
    ScalarField c(g, 2.5);
    std::vector<double> dw{0.7, -1.3};
    ScalarField c1 = step(c, std::span<const double>(dw), cfg, ops, tv);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c1[i] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("noise-free explicit step dissipates H-norm and psi-energy under the bound") {
    PeriodicGrid g(1, 16);
    OperatorSet ops(coeffs_b0(g));
    auto tv = make_potential("p-laplace:1");
    SolverConfig cfg;
    cfg.grid_d = 1;
    cfg.grid_n = 16;
    cfg.lambda = 0.5;
    cfg.delta = 1e-6;
    cfg.dt = 2e-4;
    cfg.horizon = 0.01;  // 50 steps
    cfg.scheme = Scheme::explicit_euler;
    REQUIRE(cfg.dt <= explicit_stability_bound(cfg, ops, tv));
    ScalarField x = single_mode(g, 1, 1.0) + single_mode(g, 3, 0.3);
    Trajectory tr = simulate(x, cfg, ops, tv);
    for (std::size_t i = 1; i < tr.times.size(); ++i) {
        CHECK(tr.norm_H2[i] <= tr.norm_H2[i - 1] * (1.0 + 1e-12));
        CHECK(tr.psi_lambda[i] <= tr.psi_lambda[i - 1] * (1.0 + 1e-10) + 1e-14);
    }
}

TEST_CASE("split scheme dissipates the regularized energy without noise") {
    PeriodicGrid g(1, 64);
    OperatorSet ops(coeffs_b0(g));
    auto tv = make_potential("p-laplace:1");
    SolverConfig cfg;
    cfg.grid_d = 1;
    cfg.grid_n = 64;
    cfg.lambda = 1e-2;
    cfg.delta = 1e-6;
    cfg.dt = 1e-3;  // far beyond the explicit bound
    cfg.horizon = 0.05;
    cfg.scheme = Scheme::semi_implicit_split;
    CHECK(cfg.dt > explicit_stability_bound(cfg, ops, tv));
    ScalarField x = single_mode(g, 1, 1.0) + single_mode(g, 5, 0.4);
    Trajectory tr = simulate(x, cfg, ops, tv);
    for (std::size_t i = 1; i < tr.times.size(); ++i) {
        CHECK(tr.psi_lambda[i] <= tr.psi_lambda[i - 1] * (1.0 + 1e-10) + 1e-14);
    }
}

TEST_CASE("T = 0 yields the initial state only") {
    PeriodicGrid g(1, 32);
    OperatorSet ops(coeffs("d1-transport:0.5", g));
    auto p2 = make_potential("p-laplace:2");
    SolverConfig cfg;
    cfg.grid_d = 1;
    cfg.grid_n = 32;
    cfg.horizon = 0.0;
    Trajectory tr = simulate(single_mode(g), cfg, ops, p2);
    CHECK(tr.times.size() == 1);
    CHECK(tr.times[0] == 0.0);
    CHECK(tr.norm_H2[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("identical seeds give bitwise-identical statistics") {
    PeriodicGrid g(2, 16);
    OperatorSet ops(coeffs("paper-2.5", g));
    auto tv = make_potential("p-laplace:1");
    SolverConfig cfg;
    cfg.grid_d = 2;
    cfg.grid_n = 16;
    cfg.lambda = 1e-2;
    cfg.delta = 1e-3;
    cfg.dt = 1e-4;
    cfg.horizon = 5e-3;
    cfg.seed = 99;
    ScalarField x = ScalarField::sample(g, [](double t, double s) {
        return std::sin(2.0 * kPi * t) + 0.5 * std::cos(2.0 * kPi * s);
    });
    Trajectory t1 = simulate(x, cfg, ops, tv, 3);
    Trajectory t2 = simulate(x, cfg, ops, tv, 3);
    CHECK(t1.norm_H2 == t2.norm_H2);
    CHECK(t1.psi_lambda == t2.psi_lambda);
    CHECK(t1.mean == t2.mean);
    Trajectory t3 = simulate(x, cfg, ops, tv, 4);
    CHECK(t1.norm_H2 != t3.norm_H2);
}

TEST_CASE("mean is conserved along noisy paths") {
    PeriodicGrid g(2, 16);
    OperatorSet ops(coeffs("paper-2.5", g));
    auto tv = make_potential("p-laplace:1");
    SolverConfig cfg;
    cfg.grid_d = 2;
    cfg.grid_n = 16;
    cfg.lambda = 1e-2;
    cfg.delta = 1e-3;
    cfg.dt = 1e-4;
    cfg.horizon = 0.1;  // 1000 steps
    cfg.scheme = Scheme::semi_implicit_split;
    ScalarField x = ScalarField::sample(g, [](double t, double s) {
        return 0.3 + std::sin(2.0 * kPi * t) * std::cos(2.0 * kPi * s);
    });
    Trajectory tr = simulate(x, cfg, ops, tv, 0);
    for (double m : tr.mean) CHECK(std::abs(m - 0.3) < 1e-8);
}

TEST_CASE("transport-noise characteristics oracle at one step size") {
    // p=2, a=1, b=0.5: X_t(xi) = e^{-mu t} sin(2 pi (xi + b W_t)).
    PeriodicGrid g(1, 64);
    OperatorSet ops(coeffs("d1-transport:0.5", g));
    auto p2 = make_potential("p-laplace:2");
    SolverConfig cfg;
    cfg.grid_d = 1;
    cfg.grid_n = 64;
    cfg.lambda = 1e-6;
    cfg.delta = 1e-8;
    cfg.dt = 2.5e-4;
    cfg.horizon = 0.1;
    cfg.seed = 2024;
    cfg.scheme = Scheme::semi_implicit_split;
    const double beta0 = 0.5;
    const double mu = 4.0 * kPi * kPi / (1.0 + cfg.lambda);

    double err_sum = 0.0;
    const int paths = 4;
    for (int path = 0; path < paths; ++path) {
        Trajectory tr = simulate(single_mode(g), cfg, ops, p2, path);
        NoisePath noise(cfg.seed, path, 1, cfg.steps(), cfg.dt);
        double w = 0.0;
        for (int s = 0; s < cfg.steps(); ++s) w += noise.increments(s)[0];
        ScalarField oracle = ScalarField::sample(g, [&](double x, double) {
            return std::exp(-mu * cfg.horizon) * std::sin(2.0 * kPi * (x + beta0 * w));
        });
        err_sum += std::sqrt(norm_H2(tr.final_state - oracle));
    }
    // O(sqrt(dt)) pathwise error; the constant is modest for a single mode.
    CHECK(err_sum / paths < 0.05);
}

TEST_CASE("weak error against the p=2 closed form decreases when dt halves") {
    PeriodicGrid g(1, 64);
    OperatorSet ops(coeffs("d1-transport:0.5", g));
    auto p2 = make_potential("p-laplace:2");
    const double mu = 4.0 * kPi * kPi / (1.0 + 1e-6);
    auto weak_error = [&](double dt) {
        SolverConfig cfg;
        cfg.grid_d = 1;
        cfg.grid_n = 64;
        cfg.lambda = 1e-6;
        cfg.delta = 1e-8;
        cfg.dt = dt;
        cfg.horizon = 0.04;
        cfg.seed = 5;
        cfg.scheme = Scheme::semi_implicit_split;
        double acc = 0.0;
        const int paths = 16;
        for (int path = 0; path < paths; ++path) {
            Trajectory tr = simulate(single_mode(g), cfg, ops, p2, path);
            acc += tr.norm_H2.back();
        }
        const double exact = 0.5 * std::exp(-2.0 * mu * cfg.horizon);
        return std::abs(acc / paths - exact);
    };
    const double e1 = weak_error(2e-3);
    const double e2 = weak_error(1e-3);
    CHECK(e2 < e1);
}

TEST_CASE("simulate_pair: equal starts stay equal, heat pair contracts monotonically") {
    PeriodicGrid g(1, 32);
    OperatorSet ops(coeffs_b0(g));
    auto p2 = make_potential("p-laplace:2");
    SolverConfig cfg;
    cfg.grid_d = 1;
    cfg.grid_n = 32;
    cfg.lambda = 0.1;
    cfg.delta = 1e-6;
    cfg.dt = 1e-4;
    cfg.horizon = 0.02;
    cfg.scheme = Scheme::semi_implicit_split;
    ScalarField x = single_mode(g);
    std::vector<double> diff;
    auto [tx, ty] = simulate_pair(x, x, cfg, ops, p2, 0, &diff);
    for (double d : diff) CHECK(d < 1e-24);

    ScalarField y = single_mode(g, 1, 0.5);
    diff.clear();
    simulate_pair(x, y, cfg, ops, p2, 0, &diff);
    for (std::size_t i = 1; i < diff.size(); ++i) CHECK(diff[i] <= diff[i - 1] * (1.0 + 1e-12));
    // b=0, p=2: exact e^{-2 mu t} decay of the squared distance.
    const double mu = 4.0 * kPi * kPi / (1.0 + cfg.lambda);
    const double expected = diff.front() * std::exp(-2.0 * mu * cfg.horizon);
    CHECK(diff.back() == doctest::Approx(expected).epsilon(2e-3));
}

TEST_CASE("coupled paths with monotone drift stay contractive per path") {
    PeriodicGrid g(2, 16);
    OperatorSet ops(coeffs("paper-2.5", g));
    auto tv = make_potential("p-laplace:1");
    SolverConfig cfg;
    cfg.grid_d = 2;
    cfg.grid_n = 16;
    cfg.lambda = 1e-2;
    cfg.delta = 1e-3;
    cfg.dt = 1e-4;
    cfg.horizon = 0.02;
    cfg.seed = 31;
    cfg.scheme = Scheme::semi_implicit_split;
    ScalarField x = ScalarField::sample(g, [](double t, double s) {
        return std::sin(2.0 * kPi * t) + std::cos(2.0 * kPi * s);
    });
    ScalarField y = x;
    y.axpy(0.4, ScalarField::sample(g, [](double t, double) { return std::sin(2.0 * kPi * t); }));
    std::vector<double> diff;
    simulate_pair(x, y, cfg, ops, tv, 0, &diff);
    CHECK(diff.back() <= diff.front() * (1.0 + 1e-6));
}

TEST_CASE("blow-up guard trips on an unstable explicit run") {
    PeriodicGrid g(1, 64);
    OperatorSet ops(coeffs_b0(g));
    auto p2 = make_potential("p-laplace:2");
    SolverConfig cfg;
    cfg.grid_d = 1;
    cfg.grid_n = 64;
    cfg.lambda = 1e-3;
    cfg.delta = 1e-6;
    cfg.dt = 1e-3;  // mode 9 has dt * mu ~ 32, far beyond the explicit limit
    cfg.horizon = 0.1;
    cfg.scheme = Scheme::explicit_euler;
    ScalarField x = single_mode(g, 1, 1.0) + single_mode(g, 9, 0.2);
    try {
        simulate(x, cfg, ops, p2);
        FAIL("expected BlowupError");
    } catch (const BlowupError& e) {
        CHECK(e.step_index >= 0);
        CHECK(e.step_index < cfg.steps());
    }
}

TEST_CASE("snapshots land on the requested step-grid times") {
    PeriodicGrid g(1, 32);
    OperatorSet ops(coeffs_b0(g));
    auto p2 = make_potential("p-laplace:2");
    SolverConfig cfg;
    cfg.grid_d = 1;
    cfg.grid_n = 32;
    cfg.lambda = 0.1;
    cfg.delta = 1e-6;
    cfg.dt = 1e-3;
    cfg.horizon = 0.01;
    cfg.scheme = Scheme::semi_implicit_split;
    SimulateOptions opts;
    opts.snapshot_times = {0.0, 0.005, 0.01};
    Trajectory tr = simulate(single_mode(g), cfg, ops, p2, 0, opts);
    REQUIRE(tr.snapshots.size() == 3);
    CHECK(tr.snapshots[1].first == doctest::Approx(0.005));

    opts.snapshot_times = {0.0033};  // off the grid
    CHECK_THROWS_AS(simulate(single_mode(g), cfg, ops, p2, 0, opts), std::invalid_argument);
}
