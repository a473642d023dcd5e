import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tvvecm.cointegrate import wls_beta_star
from tvvecm.errors import ConfigError, SingularMoments, SingularWeight
from tvvecm.mcharness import DgpSpec, simulate_path
from tvvecm.numkernel import KernelConstants, kernel_constants
from tvvecm.stabtest import (Restriction, b_path, bg_lm_test, bootstrap_stability,
                             empirical_quantile, h_path, h_weight, normalized_q,
                             q_statistic, resolve_threads, stability_test,
                             standardized_residuals)
from tvvecm.tvestim import fit_paths


class _Fit:
    """Minimal stand-in with the attributes b_path reads."""

    def __init__(self, coef):
        self.coef = coef

    d = property(lambda self: self.coef.shape[1])
    Pi = property(lambda self: self.coef[:, :, :self.d])
    Gamma = property(lambda self: self.coef[:, :, self.d:])


def test_b_path_vec_convention():
    g, d, p = 3, 2, 2
    coef = np.arange(g * d * d * p, dtype=float).reshape(g, d, d * p)
    fit = _Fit(coef)
    b = b_path(fit, 1)
    assert b.shape == (g, 2 + 4)
    mat = np.concatenate([fit.Pi[:, :, :1], fit.Gamma], axis=2)
    for i in range(d):
        for j in range(3):
            assert np.array_equal(b[:, j * d + i], mat[:, i, j])
    assert b_path(fit, 0).shape == (g, 4)
    assert not np.any(b_path(_Fit(np.zeros((2, 2, 4))), 1))


def test_restriction_validation():
    with pytest.raises(ConfigError):
        Restriction(np.array([[1.0, 0.0], [2.0, 0.0]]))
    with pytest.raises(ConfigError):
        Restriction(np.eye(2), "fixed", [1.0])
    R = Restriction.alpha_block(2, 1, 2, c_mode="fixed")
    assert R.s == 2 and R.width == 6 and np.array_equal(R.c, [0.0, 0.0])


def test_h_scalar_kronecker():
    sw = np.diag([2.0, 4.0, 5.0])[None]
    om = np.diag([0.5, 3.0])[None]
    # b index (j*d + i) for element (i, j): pick i = 1, j = 2 -> index 5
    C = np.zeros((1, 6))
    C[0, 5] = 1.0
    H = h_path(sw, om, C)
    assert H[0, 0, 0] == pytest.approx(1.0 / ((1 / 5.0) * 3.0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_kron_then_slice_equals_slice_then_kron(seed):
    rng = np.random.default_rng(seed)
    m, d = 3, 2
    A = rng.standard_normal((m, m))
    sw = A @ A.T + np.eye(m)
    B = rng.standard_normal((d, d))
    om = B @ B.T + np.eye(d)
    idx = rng.choice(m * d, size=int(rng.integers(1, m * d + 1)), replace=False)
    C = np.zeros((len(idx), m * d))
    C[np.arange(len(idx)), idx] = 1.0
    H = h_path(sw[None], om[None], C)[0]
    V = np.kron(np.linalg.inv(sw), om)
    want = np.linalg.inv(V[np.ix_(idx, idx)])
    assert np.allclose(H, want, rtol=1e-9)


def test_h_singular():
    sw = np.eye(2)[None]
    om = np.diag([1e-30, 1.0])[None]
    with pytest.raises(SingularWeight):
        h_path(sw, om, np.eye(4)[:2])


def test_q_zero_for_constant_path():
    b = np.tile([0.3, -0.2, 1.0], (50, 1))
    H = np.tile(np.eye(2), (50, 1, 1))
    R = Restriction.select([0, 2], 3)
    q, c = q_statistic(b, R, H)
    assert q == pytest.approx(0.0, abs=1e-20) and np.allclose(c, [0.3, 1.0])
    q, _ = q_statistic(b, Restriction.select([0, 2], 3, "fixed", [0.3, 1.0]), H)
    assert q == 0.0


def test_q_toy_hand_oracle():
    b = np.array([[1.0], [2.0], [4.0], [0.0], [3.0]])
    H = np.ones((5, 1, 1))
    q, c = q_statistic(b, Restriction(np.eye(1)), H)
    dev = [1 - 2, 2 - 2, 4 - 2, 0 - 2, 3 - 2]
    assert c[0] == 2.0
    assert q == pytest.approx(sum(x * x for x in dev) / 5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-2, 2), st.floats(-2, 2))
def test_estimated_centre_minimises_q(seed, c0, c1):
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((30, 3))
    H = np.tile(np.eye(2), (30, 1, 1))
    R = Restriction.select([0, 1], 3)
    q_est, _ = q_statistic(b, R, H)
    q_fix, _ = q_statistic(b, Restriction.select([0, 1], 3, "fixed", [c0, c1]), H)
    assert q_est >= 0.0
    assert q_est <= q_fix + 1e-12


def test_q_positive_iff_varying():
    rng = np.random.default_rng(0)
    b = rng.standard_normal((20, 2))
    H = np.tile(np.eye(1) * 2.0, (20, 1, 1))
    assert q_statistic(b, Restriction.select([1], 2), H)[0] > 0


def test_normalized_q():
    k = kernel_constants()
    s, T, h = 2, 400, 0.3
    centre = s * k.v0 / (T * h)
    assert normalized_q(centre, s, T, h) == pytest.approx(0.0, abs=1e-12)
    a = normalized_q(centre + 0.01, s, T, h)
    b = normalized_q(centre + 0.02, s, T, h)
    assert b == pytest.approx(2 * a)
    # exact constants: v0 = 3/5, CB = 167/770
    assert normalized_q(0.02, 2, 400, 0.3) == pytest.approx(1.66326999187, rel=1e-8)
    custom = KernelConstants(c2=0.2, v0=0.6, CB=167 / 770)
    assert normalized_q(0.02, 2, 400, 0.3, custom) == pytest.approx(1.66326999187, rel=1e-8)


def test_empirical_quantile():
    v = np.arange(1.0, 200.0)           # B = 199
    assert empirical_quantile(v, 0.95) == 190.0
    assert empirical_quantile(v[::-1], 0.95) == 190.0
    assert empirical_quantile(np.arange(1.0, 100.0), 0.999) == 99.0
    assert empirical_quantile(np.arange(1.0, 100.0), 0.0) == 1.0


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv("TVVECM_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2
    monkeypatch.setenv("TVVECM_THREADS", "x")
    with pytest.raises(ConfigError):
        resolve_threads()
    with pytest.raises(ConfigError):
        resolve_threads(0)


# -- bootstrap -----------------------------------------------------------------

R_ALPHA = Restriction.alpha_block(2, 1, 2)


def test_bootstrap_deterministic_across_threads():
    a = bootstrap_stability((2, 1, 2), R_ALPHA, 0.4, B=99, seed=11, T=150, threads=1)
    b = bootstrap_stability((2, 1, 2), R_ALPHA, 0.4, B=99, seed=11, T=150, threads=4)
    c = bootstrap_stability({"d": 2, "r": 1, "p": 2, "T": 150}, R_ALPHA, 0.4, B=99, seed=11)
    assert a.tobytes() == b.tobytes() == c.tobytes()
    d = bootstrap_stability((2, 1, 2), R_ALPHA, 0.4, B=99, seed=12, T=150, threads=1)
    assert not np.array_equal(a, d)
    assert np.all(a >= 0)


def test_bootstrap_replicates_are_keyed_by_index():
    from tvvecm.stabtest import bootstrap_statistic
    full = bootstrap_stability((2, 1, 2), R_ALPHA, 0.4, B=99, seed=3, T=120, threads=1)
    for b in (0, 41, 98):
        assert bootstrap_statistic(2, 1, 2, 120, 0.4, R_ALPHA, 3, b) == full[b]


def test_bootstrap_validation():
    with pytest.raises(ConfigError):
        bootstrap_stability((2, 1, 2), R_ALPHA, 0.4, B=50, seed=1, T=150)
    with pytest.raises(ConfigError):
        bootstrap_stability((2, 1, 3), R_ALPHA, 0.4, B=99, seed=1, T=150)
    with pytest.raises(ConfigError):
        bootstrap_stability((2, 1, 2), R_ALPHA, 0.4, B=99, seed=1)


def test_stability_test_end_to_end():
    panel = simulate_path(DgpSpec("stability", 300, b=0.0), 4)
    fit = fit_paths(panel, 2, 0.35)
    beta = wls_beta_star(panel, fit, 1).beta
    rep = stability_test(fit, R_ALPHA, 1, beta_hat=beta, B=99, seed=1, threads=1)
    assert rep.q_hat >= 0 and rep.B == 99 and len(rep.boot_stats) == 99
    assert rep.crit == empirical_quantile(rep.boot_stats, 0.95)
    assert rep.reject == (rep.q_hat > rep.crit)
    again = stability_test(fit, R_ALPHA, 1, beta_hat=beta, boot_stats=rep.boot_stats)
    assert again.q_hat == rep.q_hat and again.reject == rep.reject
    pi = stability_test(fit, R_ALPHA, 1, beta_hat=beta, boot_stats=rep.boot_stats,
                        estimator="pi")
    assert pi.q_hat >= 0
    H = h_weight(fit, beta_hat=beta, restriction=R_ALPHA)
    assert np.all(np.linalg.eigvalsh(H)[:, 0] > 0)
    assert H.shape == (fit.grid.shape[0], 2, 2)
    with pytest.raises(ConfigError):
        stability_test(fit, R_ALPHA, 1, beta_hat=None, B=99)


def test_alpha_zero_test_rejects_on_cointegrated_data():
    panel = simulate_path(DgpSpec("dgp1", 300), 2)
    fit = fit_paths(panel, 2, 0.5)
    beta = wls_beta_star(panel, fit, 1).beta
    R = Restriction.alpha_block(2, 1, 2, c_mode="fixed")
    rep = stability_test(fit, R, 1, beta_hat=beta, B=99, seed=1, threads=1)
    assert rep.reject and np.array_equal(rep.c_used, [0.0, 0.0])


# -- Breusch-Godfrey ---------------------------------------------------------------

def test_bg_scalar_reduction():
    rng = np.random.default_rng(8)
    e = rng.standard_normal(300)
    out = bg_lm_test(e[:, None])
    x0, x1 = e[1:], e[:-1]
    rho2 = (x0 @ x1) ** 2 / ((x0 @ x0) * (x1 @ x1))
    assert out["df"] == 1
    assert out["stat"] == pytest.approx(len(x0) * rho2, rel=1e-10)


def test_bg_perfect_correlation():
    e = np.full((200, 1), 1.3)
    assert bg_lm_test(e)["p_value"] < 1e-6
    walk = np.cumsum(np.random.default_rng(0).standard_normal((500, 2)), axis=0)
    assert bg_lm_test(walk)["p_value"] < 1e-6


def test_bg_singular():
    with pytest.raises(SingularMoments):
        bg_lm_test(np.zeros((50, 2)))


def test_bg_null_calibration():
    rej = 0
    for s in range(500):
        e = np.random.default_rng(s).standard_normal((1000, 2))
        rej += bg_lm_test(e)["p_value"] < 0.05
    assert 0.02 <= rej / 500 <= 0.09


def test_standardized_residuals_whiten(dgp1_400):
    fit = fit_paths(dgp1_400, 2, 0.5)
    eps = standardized_residuals(fit)
    assert np.allclose(np.cov(eps.T), np.eye(2), atol=0.2)
