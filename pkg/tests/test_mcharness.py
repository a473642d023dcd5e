import numpy as np
import pytest

from tvvecm.errors import ConfigError
from tvvecm.mcharness import (BETA, DgpSpec, McConfig, alpha_dgp1, d_T, gamma1, omega,
                              run_lag_table, run_rank_table, run_rmse_coverage,
                              run_size_power, simulate_path)
from tvvecm.stabtest import Restriction, bootstrap_statistic, empirical_quantile


def test_coefficient_paths():
    assert np.allclose(gamma1(0.5), [[0.5, -0.2 * np.exp(-0.5)],
                                     [-0.2 * np.cos(np.pi / 2), 0.6 * np.exp(-1.0)]])
    assert np.allclose(omega(0.5), [[0.8 * np.exp(-0.25) + 0.5, 0], [0.1, 1.0]])
    assert np.allclose(alpha_dgp1(0.0)[:, 0], [-0.5, 0.6])
    assert d_T(400, 400 ** -0.2) == pytest.approx(400 ** -0.5 * 400 ** 0.05)


def test_iid_oracle_with_overrides():
    spec = DgpSpec("dgp2", 2000, gamma_fn=lambda t: np.zeros((2, 2)),
                   omega_fn=lambda t: np.eye(2))
    y = simulate_path(spec, 3).values
    dy = np.diff(y, axis=0)
    assert np.allclose(np.cov(dy.T), np.eye(2), atol=0.1)


def test_dgp1_error_correction_term_mean_reverts():
    y = simulate_path(DgpSpec("dgp1", 800), 4).values
    z = y @ BETA
    z = z - z.mean()
    rho = (z[1:] @ z[:-1]) / (z[:-1] @ z[:-1])
    assert rho < 1 - 1e-3


def test_simulation_is_deterministic():
    a = simulate_path(DgpSpec("dgp1", 300), 9, key=(300, 4)).values
    b = simulate_path(DgpSpec("dgp1", 300), 9, key=(300, 4)).values
    c = simulate_path(DgpSpec("dgp1", 300), 9, key=(300, 5)).values
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)


def test_stability_b0_ignores_dT_bandwidth():
    a = simulate_path(DgpSpec("stability", 200, b=0.0, h_dT=0.2), 1).values
    b = simulate_path(DgpSpec("stability", 200, b=0.0, h_dT=0.9), 1).values
    assert a.tobytes() == b.tobytes()
    c = simulate_path(DgpSpec("stability", 200, b=2.0), 1).values
    assert not np.array_equal(a, c)


def test_spec_validation():
    with pytest.raises(ConfigError):
        DgpSpec("dgp3", 100)
    with pytest.raises(ConfigError):
        DgpSpec("dgp1", 100, burn_in=-1)
    with pytest.raises(ConfigError):
        McConfig(reps=0)
    with pytest.raises(ConfigError):
        McConfig(dT_rule="other")


def test_lag_table_single_rep_reproducible():
    cfg = McConfig(reps=1, seed=5, workers=1)
    a = run_lag_table(cfg, ("dgp1",), (200,))
    b = run_lag_table(cfg, ("dgp1",), (200,))
    cell = a.cells[0]
    assert {cell["p_lt_2"], cell["p_eq_2"], cell["p_gt_2"]} <= {0.0, 1.0}
    assert a.cells == b.cells


def test_worker_count_does_not_change_results():
    one = run_rank_table(McConfig(reps=4, seed=2, workers=1), ("dgp2",), (200,))
    two = run_rank_table(McConfig(reps=4, seed=2, workers=2), ("dgp2",), (200,))
    assert one.cells == two.cells
    c = one.cells[0]
    assert c["r_eq_0"] + c["r_eq_1"] + c["r_eq_2"] == pytest.approx(1.0)


def test_rmse_report_ranges():
    rep = run_rmse_coverage(McConfig(reps=3, seed=1, workers=1), Ts=(200,))
    c = rep.cell(T=200)
    for k in ("rmse_alpha", "rmse_beta", "rmse_gamma"):
        assert c[k] >= 0
    for k in ("cov_alpha", "cov_beta", "cov_gamma"):
        assert 0.0 <= c[k] <= 1.0
    assert rep.to_dict()["reps"] == 3


def test_size_power_report_shape():
    rep = run_size_power(McConfig(reps=2, seed=1, bandwidth=1.0, B=99, workers=1),
                         bs=(0.0, 2.0), multipliers=(1.0,), Ts=(200,))
    assert len(rep.cells) == 2
    for c in rep.cells:
        assert 0.0 <= c["reject_0.05"] <= c["reject_0.1"] <= 1.0
    assert rep.per_rep[(200, 1.0, 0.0)].shape == (2, 2)


def test_bootstrap_self_consistency():
    # a statistic drawn from the bootstrap null model is rejected at about the nominal rate
    R = Restriction.alpha_block(2, 1, 2)
    h = 400 ** -0.2
    pool = np.array([bootstrap_statistic(2, 1, 2, 400, h, R, 77, b) for b in range(399)])
    crit = empirical_quantile(pool[200:], 0.95)
    assert 0.02 <= np.mean(pool[:200] > crit) <= 0.09
