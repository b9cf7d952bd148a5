import math

import numpy as np
import pytest

from sparselaw.ensemble import EnsembleConfig, sample_er
from sparselaw.experiments import (
    SweepPlan,
    bootstrap_trace,
    center_test_vector,
    delocalization_study,
    dos_local_law,
    geometric_eta_grid,
    im_s_by_components,
    im_trace_resolvent_dense,
    local_law_sweep,
    main_estimate_bounds,
    main_estimates_study,
    parse_eta_spec,
    que_statistic,
    subcritical_demo,
)
from sparselaw.io import dumps_json
from sparselaw.resolvent import compute_green
from sparselaw.spectral import EmpiricalSpectralMeasure


def test_eta_grid():
    g = geometric_eta_grid(1000)
    assert len(g) == 40 and g[0] == 1.0 and g[-1] == pytest.approx(2e-3)
    assert g == sorted(g, reverse=True)
    assert parse_eta_spec("geometric:1:0.001:40", 2000)[-1] == pytest.approx(1e-3)
    assert parse_eta_spec("0.1,1,0.5", 100) == [1.0, 0.5, 0.1]


def test_plan_validation():
    c = EnsembleConfig(100, 3)
    with pytest.raises(ValueError, match="decreasing"):
        SweepPlan(c, [0.0], [0.1, 1.0], 1)
    with pytest.raises(ValueError, match="outside"):
        SweepPlan(c, [0.0], [0.005], 1)
    with pytest.raises(ValueError):
        SweepPlan(c, [0.0], [1.0], 1, r_values=(3,))


def test_sweep_reproducible_and_global_regime():
    c = EnsembleConfig.with_q_multiplier(1000, 2, seed=4)
    plan = SweepPlan(c, [0.0], [1.0], 10, (2,))
    a = local_law_sweep(plan)
    assert dumps_json(a.to_dict()) == dumps_json(local_law_sweep(plan).to_dict())
    assert dumps_json(a.to_dict()) == dumps_json(local_law_sweep(plan, n_jobs=2).to_dict())
    row = a.rows[0]
    assert row["s_minus_m"]["q90"] <= 0.1
    assert row["phi_frequency"] == 1.0
    assert row["zeta"]["2"] > 0


def test_sweep_eigen_and_direct_agree():
    c = EnsembleConfig(200, 4, seed=1)
    eig = local_law_sweep(SweepPlan(c, [0.3], [0.5], 2, method="eigen"))
    dir_ = local_law_sweep(SweepPlan(c, [0.3], [0.5], 2, method="direct"))
    a = eig.rows[0]["statistic"]["max"]
    b = dir_.rows[0]["statistic"]["max"]
    assert a == pytest.approx(b, rel=1e-9)


def test_bootstrap_frequencies():
    c = EnsembleConfig.with_q_multiplier(500, 2, seed=2)
    plan = SweepPlan(c, [0.0], geometric_eta_grid(500, points=4), 4)
    rep = bootstrap_trace(plan, xi=1.0)
    top = rep.rows[0]
    assert top["P_xi"] == 1.0
    for row in rep.rows:
        for k in ("P_omega", "P_xi", "P_both"):
            assert 0 <= row[k] <= 1
        assert row["P_both"] <= min(row["P_omega"], row["P_xi"])


def test_eigen_and_resolvent_im_s_agree():
    s = sample_er(EnsembleConfig(150, 4, seed=8))
    measure = EmpiricalSpectralMeasure().fit(s.rescaled)
    z = 0.4 + 0.03j
    g = compute_green(s.rescaled, z)
    assert measure.im_stieltjes(0.4, 0.03) == pytest.approx(g.s.imag, abs=1e-10)


def test_cholesky_trace_matches_eigenvalues():
    c = EnsembleConfig.from_p(600, 0.5 * math.log(600) / 600, include_diagonal=False,
                              subcritical=True, seed=5)
    s = sample_er(c)
    eta = 600 ** -0.75
    w = np.linalg.eigvalsh(s.rescaled)
    exact = math.fsum(eta / (w * w + eta * eta)) / 600
    assert im_s_by_components(s, eta) == pytest.approx(exact, rel=1e-9)
    assert im_s_by_components(s, eta, dense_limit=1) == pytest.approx(exact, rel=1e-8)
    B = s.rescaled[:50, :50].copy()
    wb = np.linalg.eigvalsh(B)
    assert im_trace_resolvent_dense(B, 0.1) == pytest.approx(math.fsum(0.1 / (wb**2 + 0.01)))


def test_subcritical_small():
    rep = subcritical_demo(1000, 0.5, 3, seed=1)
    s = rep.summary
    assert s["edge_list_matches_zero_rows"]
    assert s["all_bounds_hold"]
    for t in rep.trials:
        assert t["im_s"] >= (t["Y"] / 1000) / s["eta"] * (1 - 1e-9)
    with pytest.raises(ValueError):
        subcritical_demo(1000, 1.5, 1)


def test_delocalization_supercritical_and_isolated():
    sup = delocalization_study(EnsembleConfig.with_q_multiplier(300, 3, seed=1), 3)
    assert sup.summary["fraction_below_threshold"] == 1.0
    assert all(t["orthonormality_error"] < 1e-10 for t in sup.trials)
    sub = EnsembleConfig.from_p(1000, 0.5 * math.log(1000) / 1000, include_diagonal=False,
                                subcritical=True, seed=3)
    rep = delocalization_study(sub, 2)
    for t in rep.trials:
        if t["isolated"]:
            assert t["max_sup_norm"] == 1.0
    with pytest.raises(ValueError):
        delocalization_study(EnsembleConfig(50, 2), 1)


def test_dos_full_mass_and_symmetry():
    c = EnsembleConfig.with_q_multiplier(400, 3, seed=6)
    rep = dos_local_law(c, [(-10, 10), (-1.5, -0.5), (0.5, 1.5)], 3)
    assert rep.rows[0]["median_mu"] == pytest.approx(1.0, abs=1 / 400 + 1e-12)
    left, right = rep.rows[1]["median_mu"], rep.rows[2]["median_mu"]
    assert abs(left - right) < 0.05
    with pytest.raises(ValueError):
        dos_local_law(c, [(1, 1)], 1)


def test_que():
    n = 200
    c = EnsembleConfig.with_q_multiplier(n, 3, seed=2)
    zero = que_statistic(c, np.zeros(n), [0, 5], 2)
    assert all(v == 0 for t in zero.trials for v in t["values"])
    a = np.r_[np.ones(n // 2), np.zeros(n // 2)] - 0.5
    flat = np.ones(n) / math.sqrt(n)
    assert float(a @ flat**2) == pytest.approx(0.0, abs=1e-15)
    rep = que_statistic(c, a, [1, 50, 100], 3)
    assert rep.summary["fraction_below_threshold"] >= 0.9
    with pytest.raises(ValueError):
        center_test_vector(np.ones(5))
    assert center_test_vector(np.ones(5), auto_center=True).sum() == 0


def test_main_estimate_bounds_structure():
    b = main_estimate_bounds(1000, 5, 0.1, 4, 0.0)
    assert b["G_offdiag"] == b["G_minus_minor"]
    ne = 100.0
    expected = 48**2 * ((4 / 25) ** 0.5 + 16 / ne ** (1 / 3) + (4 / (math.log(ne) * 5)) ** 2)
    assert b["Y_G"] == pytest.approx(expected)


def test_main_estimates_small():
    c = EnsembleConfig(200, 5, seed=3)
    rep = main_estimates_study(c, 0.2 + 0.1j, 4, 8)
    assert rep.summary["all_dominated"]
    assert rep.summary["bounds_equal_offdiag_minor"]
    with pytest.raises(ValueError):
        main_estimates_study(EnsembleConfig(200, 1.5), 0.2 + 0.1j, 4, 2)
