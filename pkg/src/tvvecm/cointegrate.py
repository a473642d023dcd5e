"""Time-invariant cointegration matrix.

The cointegrating matrix is normalised as ``beta = [I_r; beta_star]`` so the
first ``r`` columns of each ``Pi(tau)`` estimate ``alpha(tau)``.  ``beta_star``
is then estimated by weighted least squares on the profiled residuals, with
the short-run lags partialled out by a local-linear smoother at every
``tau_t``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from .errors import RankOutOfRange, SingularInformation, SingularMoments
from .numkernel import inv_psd, moore_penrose_pinv
from .tvestim import build_regressors, design_for, estimate_omega


@dataclass
class CointegrationFit:
    r: int
    beta_star: np.ndarray      # (d - r, r)
    info: np.ndarray           # standardisation matrix for the CIs
    se: np.ndarray             # (d - r, r)
    lower: np.ndarray
    upper: np.ndarray
    level: float
    alpha_path: np.ndarray     # (g, d, r)
    wls_matrix: np.ndarray

    @property
    def beta(self):
        return np.vstack([np.eye(self.r), self.beta_star])

    def to_dict(self):
        return {"r": self.r, "beta_star": self.beta_star.tolist(), "se": self.se.tolist(),
                "ci_lower": self.lower.tolist(), "ci_upper": self.upper.tolist(),
                "level": self.level}


@dataclass
class ConstantVecmFit:
    alpha: np.ndarray
    beta_star: np.ndarray
    gamma: np.ndarray
    omega: np.ndarray
    eigenvalues: np.ndarray

    @property
    def beta(self):
        r = self.alpha.shape[1]
        return np.vstack([np.eye(r), self.beta_star])

    def to_dict(self):
        return {k: getattr(self, k).tolist()
                for k in ("alpha", "beta_star", "gamma", "omega", "eigenvalues")}


def _check_rank(r, d):
    if not 1 <= r <= d - 1:
        raise RankOutOfRange(f"rank must lie in 1..{d - 1}, got {r}")


def alpha_from_pi(fit, r):
    """First ``r`` columns of every ``Pi(tau)``."""
    _check_rank(r, fit.d)
    return fit.Pi[:, :, :r]


def lag_smoother(frame, h):
    """Matrix ``C`` with ``(C z)_t`` the local-linear fit of ``z`` on the lagged
    differences, evaluated at ``tau_t`` and ``dx_{t-1}``.

    Partialling out is ``z - C z``.  Returns ``None`` when there are no lagged
    differences (``p = 1``).
    """
    X = frame.dxlag
    n, m = X.shape
    if m == 0:
        return None
    design = design_for(frame.T, frame.t0, h)
    design.check(m)
    outer = (X[:, :, None] * X[:, None, :]).reshape(n, m * m)
    M = design.stack @ outer
    S0, S1, S2 = (M[i * n:(i + 1) * n].reshape(n, m, m) for i in range(3))
    B = np.empty((n, 2 * m, 2 * m))
    B[:, :m, :m] = S0
    B[:, :m, m:] = S1
    B[:, m:, :m] = S1
    B[:, m:, m:] = S2
    g = np.einsum("tij,tj->ti", inv_psd(B)[:, :, :m], X)
    K = design.K
    u = (design.tau_obs[None, :] - design.grid[:, None]) / design.h
    return K * (g[:, :m] @ X.T + u * (g[:, m:] @ X.T))


def wls_beta_star(panel, fit, r, cfg=None, level=0.95, project=True):
    """Weighted least squares estimate of ``beta_star`` with Wald-type CIs.

    Builds ``r_t = dy_t - alpha(tau_t) y1_{t-1}`` and
    ``R_t' = y2_{t-1}' (x) alpha(tau_t)``, partials the lagged differences out
    of both (when ``p >= 2`` and ``project``), and solves
    ``(sum R~ Omega^-1 R~') vec(beta_star') = sum R~ Omega^-1 r~``.  Bands use
    ``info = sum y2 y2' (x) alpha' Omega^-1 alpha``.
    """
    frame = fit.frame
    d = frame.d
    _check_rank(r, d)
    if fit.Omega is None:
        estimate_omega(fit)
    h = fit.h if cfg is None else getattr(cfg, "h", cfg)
    alpha = fit.Pi[:, :, :r]
    y1 = frame.ylag[:, :r]
    y2 = frame.ylag[:, r:]
    n = frame.n
    q = (d - r) * r
    resp = frame.dy - np.einsum("tda,ta->td", alpha, y1)
    RT = np.einsum("tj,tda->tdja", y2, alpha).reshape(n, d, q)
    C = lag_smoother(frame, h) if project else None
    if C is not None:
        resp = resp - C @ resp
        RT = RT - np.einsum("ts,sdq->tdq", C, RT)
    oinv = inv_psd(fit.Omega)
    A = np.einsum("tdq,tde,tep->qp", RT, oinv, RT)
    b = np.einsum("tdq,tde,te->q", RT, oinv, resp)
    A = 0.5 * (A + A.T)
    try:
        cho = linalg.cho_factor(A)
    except linalg.LinAlgError as exc:
        raise SingularInformation("WLS information matrix is singular") from exc
    if np.linalg.cond(A) > 1e12:
        raise SingularInformation("WLS information matrix is numerically singular")
    vec = linalg.cho_solve(cho, b)
    beta_star = vec.reshape(r, d - r, order="F").T

    ata = np.einsum("tda,tde,teb->tab", alpha, oinv, alpha)
    info = np.einsum("tj,tk,tab->jakb", y2, y2, ata).reshape(q, q)
    info = 0.5 * (info + info.T)
    try:
        cov = linalg.inv(info)
    except linalg.LinAlgError as exc:
        raise SingularInformation("information matrix is singular") from exc
    se_vec = np.sqrt(np.maximum(np.diag(cov), 0.0))
    se = se_vec.reshape(r, d - r, order="F").T
    z = stats.norm.ppf(0.5 + level / 2.0)
    return CointegrationFit(r=r, beta_star=beta_star, info=info, se=se,
                            lower=beta_star - z * se, upper=beta_star + z * se,
                            level=level, alpha_path=alpha, wls_matrix=A)


def _ols_resid(Y, X):
    if X.shape[1] == 0:
        return Y
    coef, *_ = np.linalg.lstsq(X, Y, rcond=None)
    return Y - X @ coef


def fit_constant_vecm(panel, p, r):
    """Reduced-rank regression estimate of a constant-parameter VECM.

    Lagged differences are concentrated out by OLS; ``beta`` spans the ``r``
    leading generalised eigenvectors of ``S10 S00^+ S01`` relative to ``S11``
    and is normalised to ``[I_r; beta_star]``.  ``alpha``, ``Gamma`` and
    ``Omega`` follow by OLS given ``beta``.
    """
    frame = build_regressors(panel, p)
    d = frame.d
    _check_rank(r, d)
    Z0, Z1, Z2 = frame.dy, frame.ylag, frame.dxlag
    n = frame.n
    R0 = _ols_resid(Z0, Z2)
    R1 = _ols_resid(Z1, Z2)
    S00 = R0.T @ R0 / n
    S01 = R0.T @ R1 / n
    S11 = R1.T @ R1 / n
    if not np.any(S00):
        raise SingularMoments("response moments vanish")
    lhs = S01.T @ moore_penrose_pinv(S00) @ S01
    try:
        lam, V = linalg.eigh(0.5 * (lhs + lhs.T), S11)
    except linalg.LinAlgError as exc:
        raise SingularMoments("level moment matrix is not positive definite") from exc
    order = np.argsort(lam)[::-1]
    lam, V = lam[order], V[:, order]
    beta = V[:, :r]
    top = beta[:r]
    if abs(np.linalg.det(top)) < 1e-12 * max(1.0, np.abs(beta).max()) ** r:
        raise SingularMoments("leading block of beta is singular; reorder the series")
    beta = beta @ np.linalg.inv(top)
    alpha = S01 @ beta @ np.linalg.inv(beta.T @ S11 @ beta)
    ect = Z0 - Z1 @ beta @ alpha.T
    if Z2.shape[1]:
        gamma = np.linalg.lstsq(Z2, ect, rcond=None)[0].T
    else:
        gamma = np.zeros((d, 0))
    resid = ect - Z2 @ gamma.T
    return ConstantVecmFit(alpha=alpha, beta_star=beta[r:], gamma=gamma,
                           omega=resid.T @ resid / n, eigenvalues=lam)
