"""Python smoke tests for the svitorus extension module."""

import math

import numpy as np

import svitorus as sv


def test_grid_and_fields():
    g = sv.PeriodicGrid(1, 64)
    assert g.n == 64 and g.d == 1
    x = np.sin(2.0 * math.pi * np.arange(64) / 64.0)
    f = sv.ScalarField(g, x)
    assert np.allclose(f.to_numpy(), x)
    assert abs(sv.norm_H2(f) - 0.5) < 1e-12
    lap = sv.laplacian(f)
    assert np.allclose(lap, -4.0 * math.pi**2 * x, atol=1e-9)
    modes = sv.dft(f)
    assert abs(modes[1] + 0.5j) < 1e-12


def test_potentials():
    tv = sv.make_potential("p-laplace:1")
    assert sv.eval_psi(tv, [3.0, 4.0]) == 5.0
    assert abs(sv.scalar_prox(tv, 2.0, 1.0) - 1.0) < 1e-12
    assert abs(sv.moreau_eval(tv, [2.0], 1.0) - 1.5) < 1e-12
    huber = sv.yosida_grad(tv, [3.0, 4.0], 0.5)
    assert abs(huber[0] - 0.6) < 1e-12 and abs(huber[1] - 0.8) < 1e-12
    rep = sv.verify_condition_N(sv.make_potential("minimal-surface"), 20.0, 200)
    assert rep["pass"] and rep["constants_used"]["K_hat"] <= 4.0


def test_checkers_and_operators():
    g = sv.PeriodicGrid(2, 16)
    cs = sv.CoefficientSet.preset("paper-2.5", g)
    assert sv.check_E(cs)["pass"]
    assert sv.check_D(cs)["pass"]
    assert sv.check_R(cs)["pass"]
    assert sv.check_BE_sufficient(cs)["pass"]

    ops = sv.OperatorSet(cs)
    x = sv.random_band_limited_field(g, 7)
    v = ops.resolvent_Ja(x, 0.01)
    assert v.shape == (16, 16)
    assert np.isfinite(v).all()


def test_simulate_determinism():
    g = sv.PeriodicGrid(1, 32)
    cs = sv.CoefficientSet.preset("d1-transport:0.5", g)
    ops = sv.OperatorSet(cs)
    pot = sv.make_potential("p-laplace:2")
    cfg = sv.SolverConfig()
    cfg.grid_d, cfg.grid_n = 1, 32
    cfg.lambda_, cfg.delta, cfg.dt, cfg.T = 1e-2, 1e-3, 1e-4, 0.005
    cfg.seed = 12
    cfg.scheme = sv.Scheme.semi_implicit_split
    x = sv.ScalarField(g, np.sin(2.0 * math.pi * np.arange(32) / 32.0))
    t1 = sv.simulate(x, cfg, ops, pot, 0)
    t2 = sv.simulate(x, cfg, ops, pot, 0)
    assert np.array_equal(t1["norm_H2"], t2["norm_H2"])
    assert np.array_equal(t1["final_state"], t2["final_state"])
    t3 = sv.simulate(x, cfg, ops, pot, 1)
    assert not np.array_equal(t1["final_state"], t3["final_state"])
    assert abs(t1["mean"].max() - t1["mean"].min()) < 1e-10


def test_verify_reports():
    g = sv.PeriodicGrid(1, 32)
    cs = sv.CoefficientSet.preset("d1-transport:0.5", g)
    ops = sv.OperatorSet(cs)
    pot = sv.make_potential("p-laplace:2")
    cfg = sv.SolverConfig()
    cfg.grid_d, cfg.grid_n = 1, 32
    cfg.lambda_, cfg.delta, cfg.dt, cfg.T, cfg.paths = 0.05, 1e-3, 1e-4, 0.005, 4
    x = sv.ScalarField(g, np.sin(2.0 * math.pi * np.arange(32) / 32.0))
    rep = sv.verify_energy_bound(x, cfg, ops, pot)
    assert rep["pass"]
    assert {"name", "left", "right", "margin", "stderr", "pass", "constants_used"} <= set(rep)

    wdc = sv.estimate_wdc_constant(ops, [4.0, 16.0, 64.0], 2, 3)
    assert wdc["pass"] and abs(wdc["c_hat"]) < 1e-8


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print(f"ok: {t.__name__}")
    print(f"{len(tests)} python smoke test(s) passed")


if __name__ == "__main__":
    main()
