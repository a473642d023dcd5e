import numpy as np
import pytest

from tvvecm.cointegrate import (alpha_from_pi, fit_constant_vecm, lag_smoother,
                                wls_beta_star)
from tvvecm.errors import RankOutOfRange
from tvvecm.numkernel import epanechnikov, inv_psd
from tvvecm.tvestim import Panel, build_regressors, fit_paths


def test_lag_smoother_matches_per_row_regression(dgp1_400):
    fr = build_regressors(dgp1_400, 3)
    h = 0.5
    C = lag_smoother(fr, h)
    X = fr.dxlag
    z = np.sin(np.arange(fr.n))
    got = C @ z
    for t in (0, 10, 190, fr.n - 1):
        u = (fr.tau - fr.tau[t]) / h
        w = epanechnikov(u)
        Z = np.hstack([X, X * u[:, None]])
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(Z * sw[:, None], z * sw, rcond=None)
        assert np.isclose(got[t], X[t] @ coef[:X.shape[1]], rtol=1e-8, atol=1e-10)
    assert lag_smoother(build_regressors(dgp1_400, 1), h) is None


def test_wls_matches_dense_kronecker_oracle(dgp1_400):
    fit = fit_paths(dgp1_400, 2, 0.5)
    res = wls_beta_star(dgp1_400, fit, 1)
    fr = fit.frame
    C = lag_smoother(fr, 0.5)
    alpha = fit.Pi[:, :, :1]
    r = fr.dy - alpha[:, :, 0] * fr.ylag[:, :1]
    Rt = [np.kron(fr.ylag[t, 1:], alpha[t]) for t in range(fr.n)]    # d x q
    Rt = np.array(Rt)
    P = np.eye(fr.n) - C
    r = P @ r
    Rt = np.einsum("ts,sdq->tdq", P, Rt)
    Oi = inv_psd(fit.Omega)
    A = sum(Rt[t].T @ Oi[t] @ Rt[t] for t in range(fr.n))
    b = sum(Rt[t].T @ Oi[t] @ r[t] for t in range(fr.n))
    want = np.linalg.solve(A, b)
    assert np.allclose(res.beta_star.ravel(), want, rtol=1e-10)
    info = sum(np.kron(np.outer(fr.ylag[t, 1:], fr.ylag[t, 1:]),
                       alpha[t].T @ Oi[t] @ alpha[t]) for t in range(fr.n))
    assert np.allclose(res.info, info, rtol=1e-10)
    assert np.allclose(res.se, np.sqrt(np.diag(np.linalg.inv(info))).reshape(res.se.shape))
    assert res.lower[0, 0] < res.beta_star[0, 0] < res.upper[0, 0]


def test_wls_recovers_beta(dgp1_400):
    fit = fit_paths(dgp1_400, 2, 0.55)
    res = wls_beta_star(dgp1_400, fit, 1)
    assert abs(res.beta_star[0, 0] + 0.8) < 0.03
    assert np.allclose(res.beta[:1], [[1.0]])


def test_trivariate_vec_layout():
    # d = 3, r = 1: beta_star is 2 x 1 and vec(beta_star') orders by y2 element
    rng = np.random.default_rng(4)
    T = 500
    beta_star = np.array([-0.5, 0.3])
    x = np.cumsum(rng.standard_normal((T, 2)), axis=0)
    ect = np.zeros(T)
    y1 = np.zeros(T)
    for t in range(1, T):
        ect[t] = 0.5 * ect[t - 1] + rng.standard_normal()
        y1[t] = ect[t] - x[t] @ beta_star
    y = np.column_stack([y1, x])
    panel = Panel(y)
    fit = fit_paths(panel, 1, 0.6)
    res = wls_beta_star(panel, fit, 1)
    assert res.beta_star.shape == (2, 1)
    assert np.allclose(res.beta_star[:, 0], beta_star, atol=0.05)


def test_rank_bounds(dgp1_400):
    fit = fit_paths(dgp1_400, 2, 0.5)
    for r in (0, 2):
        with pytest.raises(RankOutOfRange):
            wls_beta_star(dgp1_400, fit, r)
        with pytest.raises(RankOutOfRange):
            alpha_from_pi(fit, r)


def test_constant_vecm_on_constant_design():
    rng = np.random.default_rng(9)
    T = 2000
    alpha = np.array([-0.3, 0.2])
    beta = np.array([1.0, -0.6])
    y = np.zeros((T, 2))
    for t in range(1, T):
        y[t] = y[t - 1] + alpha * (beta @ y[t - 1]) + rng.standard_normal(2)
    res = fit_constant_vecm(Panel(y), 1, 1)
    assert abs(res.beta_star[0, 0] + 0.6) < 0.02
    assert np.allclose(res.alpha[:, 0], alpha, atol=0.05)
    assert res.eigenvalues[0] > res.eigenvalues[1]
    assert np.allclose(res.omega, np.eye(2), atol=0.1)
