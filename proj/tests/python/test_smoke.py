import math

import degenlab as dl


def test_weight_profile():
    w = dl.WeightModel("constant", value=2.0, depth=8)
    assert w(0.3) == 2.0
    assert abs(w.a2_constant(8) - 1.0) < 1e-12
    p = w.profile(8)
    assert abs(p.c0) < 1e-12

    rw = dl.WeightModel("random_dyadic", seed=3, depth=8, beta=0.4)
    assert rw.a2_constant(8) >= 1.0
    cells = rw.grid_cell_averages(64)
    assert len(cells) == 64
    assert abs(sum(cells) / 64 - rw.mass(dl.DyadicCube(0, 0))) < 1e-12


def test_corona_summary():
    rw = dl.WeightModel("random_dyadic", seed=5, depth=8, beta=0.5)
    s = dl.corona_summary(rw, 0.4, 8)
    assert s["generations"] >= 1
    assert s["packing_ratio"] >= 0.0


def test_quadratic_ratio_flat():
    w = dl.WeightModel("constant", depth=8)
    sup, inf = dl.quadratic_ratio(w, 64, probes=6)
    assert abs(sup - 0.5) < 0.02
    assert abs(inf - 0.5) < 0.02


def test_bvp_dirichlet_mode():
    n = 64
    w = dl.WeightModel("constant", depth=8)
    datum = [math.sin(2 * math.pi * (i + 0.5) / n) for i in range(n)]
    sol = dl.solve_bvp(w, n, "dirichlet", datum, tmax=0.5, layers=8)
    u = sol["u"]
    t = sol["t"]
    for j in (2, 5, 8):
        expected = math.exp(-2 * math.pi * t[j])
        for i in (0, 17, 40):
            target = expected * math.sin(2 * math.pi * (i + 0.5) / n)
            assert abs(u[j][i] - target) < 0.02
    assert sol["csv"].startswith("t,x,u_re")


def test_acceptance_criterion_binding():
    r = dl.run_criterion(1, "smoke")
    assert r.id == 1
    assert r.passed
