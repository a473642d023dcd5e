"""Constancy tests for the short-run coefficients.

The statistic is the weighted integrated squared deviation of ``C b(tau)``
from a constant, with ``b(tau) = vec([alpha(tau), Gamma(tau)])`` stacked
column-major.  Critical values come from a simulation-assisted bootstrap in
which the null model has standard normal regressors, so the bootstrap
distribution depends only on the dimensions, the sample size, the bandwidth
and the restriction.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import ConfigError, SingularMoments, SingularWeight
from .numkernel import inv_psd, inv_sqrt_psd, kernel_constants, symmetrize
from .rng import stream
from .tvestim import RegressorFrame, _h_of, design_for, estimate_omega, fit_frame

_COND_LIMIT = 1e12
BOOT_KEY = 2  # stream tag separating bootstrap draws from data simulation


@dataclass(frozen=True)
class Restriction:
    """``H0: C b(tau) = c`` with ``c`` estimated or fixed."""

    C: np.ndarray
    c_mode: str = "estimate"
    c: np.ndarray = None

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        if np.linalg.matrix_rank(C) != C.shape[0]:
            raise ConfigError("restriction matrix must have full row rank")
        object.__setattr__(self, "C", C)
        if self.c_mode not in ("estimate", "fixed"):
            raise ConfigError(f"unknown c_mode {self.c_mode!r}")
        if self.c_mode == "fixed":
            c = np.zeros(C.shape[0]) if self.c is None else np.asarray(self.c, dtype=float).ravel()
            if c.shape[0] != C.shape[0]:
                raise ConfigError("fixed c must have one entry per restriction")
            object.__setattr__(self, "c", c)

    @property
    def s(self):
        return self.C.shape[0]

    @property
    def width(self):
        return self.C.shape[1]

    @classmethod
    def select(cls, indices, width, c_mode="estimate", c=None):
        """Restriction picking entries ``indices`` of ``b``."""
        C = np.zeros((len(indices), width))
        C[np.arange(len(indices)), list(indices)] = 1.0
        return cls(C, c_mode, c)

    @classmethod
    def alpha_block(cls, d, r, p, c_mode="estimate", c=None):
        """All ``d * r`` entries of ``alpha``."""
        return cls.select(range(d * r), d * r + d * d * (p - 1), c_mode, c)


@dataclass
class StabilityReport:
    q_hat: float
    q_star: float
    c_used: np.ndarray
    B: int
    boot_stats: np.ndarray = field(repr=False)
    crit: float
    alpha_level: float
    reject: bool
    seed: int
    p_value: float = None

    def to_dict(self):
        return {"q_hat": float(self.q_hat), "q_star": float(self.q_star),
                "c_used": np.asarray(self.c_used).tolist(), "B": int(self.B),
                "crit": float(self.crit), "alpha_level": float(self.alpha_level),
                "reject": bool(self.reject), "seed": int(self.seed),
                "p_value": None if self.p_value is None else float(self.p_value)}


def b_path(fit, r):
    """``vec([alpha(tau), Gamma(tau)])`` at every grid point, shape ``(g, d(r + d(p-1)))``.

    ``alpha`` is the first ``r`` columns of ``Pi``; element ``(i, j)`` of the
    ``d x (r + d(p-1))`` matrix sits at index ``j * d + i``.
    """
    d = fit.d
    if not 0 <= r <= d:
        raise ConfigError(f"rank must lie in 0..{d}, got {r}")
    mats = np.concatenate([fit.Pi[:, :, :r], fit.Gamma], axis=2)
    return np.swapaxes(mats, 1, 2).reshape(mats.shape[0], -1)


def sigma_w_path(w, design):
    """Kernel-weighted second moments ``sum K w w' / sum K`` at every grid point."""
    w = np.asarray(w, dtype=float)
    n, m = w.shape
    raw = design.K @ (w[:, :, None] * w[:, None, :]).reshape(n, m * m)
    return symmetrize(raw.reshape(-1, m, m) / design.ksum[:, None, None])


def plug_in_regressors(frame, beta=None):
    """``w_{t-1} = [y_{t-1}' beta, dx_{t-1}']'`` (only the lags when ``beta`` is None)."""
    if beta is None or np.size(beta) == 0:
        return frame.dxlag
    return np.hstack([frame.ylag @ np.asarray(beta, dtype=float), frame.dxlag])


def h_path(sigma_w, Omega, C):
    """``H(tau) = (C (Sigma_w^-1 (x) Omega) C')^-1`` on a stack of grid points."""
    sw_inv = inv_psd(sigma_w)
    V = np.einsum("gab,gij->gaibj", sw_inv, Omega)
    g, m, d = V.shape[:3]
    V = V.reshape(g, m * d, m * d)
    C = np.asarray(C, dtype=float)
    if C.shape[1] != m * d:
        raise ConfigError(f"restriction has {C.shape[1]} columns, coefficient vector has {m * d}")
    M = symmetrize(C @ V @ C.T)
    lam = np.linalg.eigvalsh(M)
    if np.any(lam[:, 0] <= lam[:, -1] / _COND_LIMIT):
        raise SingularWeight("C V_b C' is numerically singular")
    return symmetrize(np.linalg.inv(M))


def h_weight(fit, panel=None, beta_hat=None, tau=None, restriction=None, C=None):
    """Weight matrices ``H(tau)`` for a fitted model.

    ``beta_hat`` is the ``d x r`` cointegrating matrix (``None`` when
    ``r = 0``).  Returns the whole path, or the matrix at the grid point
    closest to ``tau`` when given.
    """
    if C is None:
        C = restriction.C
    w = plug_in_regressors(fit.frame, beta_hat)
    design = design_for(fit.T, fit.t0, fit.h)
    if fit.Omega is None:
        estimate_omega(fit)
    H = h_path(sigma_w_path(w, design), fit.Omega, C)
    if tau is None:
        return H
    return H[int(np.argmin(np.abs(fit.grid - tau)))]


def q_statistic(bpath, restriction, H):
    """``T^-1 sum_t (C b_t - c)' H_t (C b_t - c)`` and the centre ``c`` used.

    The average runs over the grid points (one per usable observation).
    """
    cb = np.asarray(bpath, dtype=float) @ restriction.C.T
    if restriction.c_mode == "fixed":
        c = restriction.c
    else:
        c = cb.mean(axis=0)
    dev = cb - c
    q = float(np.einsum("gi,gij,gj->", dev, H, dev) / dev.shape[0])
    return max(q, 0.0), c


def normalized_q(q_hat, s, T, h, constants=None):
    """``T sqrt(h) (q - s v0/(T h)) / sqrt(4 s CB)``."""
    k = constants if constants is not None else kernel_constants()
    return T * math.sqrt(h) * (q_hat - s * k.v0 / (T * h)) / math.sqrt(4.0 * s * k.CB)


def empirical_quantile(values, level):
    """Order statistic ``ceil(level (B + 1))`` (1-based), clamped to ``1..B``."""
    v = np.sort(np.asarray(values, dtype=float))
    B = v.shape[0]
    k = min(max(int(math.ceil(level * (B + 1) - 1e-9)), 1), B)
    return float(v[k - 1])


def resolve_threads(threads=None):
    """Thread count: explicit value, then ``TVVECM_THREADS``, then the CPU count."""
    if threads in (None, "auto"):
        env = os.environ.get("TVVECM_THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError as exc:
                raise ConfigError(f"TVVECM_THREADS={env!r} is not an integer") from exc
        else:
            threads = os.cpu_count() or 1
    threads = int(threads)
    if threads < 1:
        raise ConfigError("thread count must be positive")
    return threads


# -- simulation-assisted bootstrap ------------------------------------------

def null_frame(d, r, p, T, rng):
    """Regressor frame of the bootstrap null model.

    ``dy*_t`` and ``z*_t`` are i.i.d. standard normal; the regressors are
    ``[z*_t', dy*_{t-1}', ..., dy*_{t-p+1}']'``.  Rows start at ``t = p + 1``
    so the grid matches a data fit with ``p`` lags.
    """
    dy = rng.standard_normal((T, d))
    z = rng.standard_normal((T, r))
    t = np.arange(p + 1, T + 1)
    cols = [z[t - 1]] + [dy[t - 1 - j] for j in range(1, p)]
    return RegressorFrame(t0=p + 1, T=T, p=p, dy=dy[t - 1], hreg=np.hstack(cols), tau=t / T)


def bootstrap_statistic(d, r, p, T, h, restriction, seed, b):
    """One bootstrap draw of the statistic (replicate ``b``)."""
    frame = null_frame(d, r, p, T, stream(seed, BOOT_KEY, b))
    fit = fit_frame(frame, h)
    bp = coefficient_path(fit)      # regressors are [z, lags], so coef = [alpha, Gamma]
    design = design_for(T, frame.t0, h)
    H = h_path(sigma_w_path(frame.hreg, design), fit.Omega, restriction.C)
    null = restriction
    if restriction.c_mode == "fixed":
        null = Restriction(restriction.C, "fixed", np.zeros(restriction.s))
    return q_statistic(bp, null, H)[0]


def bootstrap_stability(dims, restriction, cfg, B=1000, seed=0, T=None, threads=None):
    """Bootstrap statistics ``Q~^b``, ``b = 0..B-1``.

    ``dims`` is ``(d, r, p)`` (or a mapping with those keys) and ``T`` the
    sample size.  Replicate ``b`` draws from its own stream keyed by
    ``(seed, b)``, so the output does not depend on ``threads``.
    """
    if isinstance(dims, dict):
        d, r, p = dims["d"], dims["r"], dims["p"]
        T = dims.get("T", T)
    else:
        d, r, p = dims
    if T is None:
        raise ConfigError("sample size T is required")
    B = int(B)
    if B < 99:
        raise ConfigError(f"B must be at least 99, got {B}")
    if restriction.width != d * r + d * d * (p - 1):
        raise ConfigError("restriction width does not match d, r and p")
    h = _h_of(cfg)
    n_thr = min(resolve_threads(threads), B)

    def run(b):
        return bootstrap_statistic(d, r, p, T, h, restriction, seed, b)

    if n_thr == 1:
        out = [run(b) for b in range(B)]
    else:
        with ThreadPoolExecutor(n_thr) as pool:
            out = list(pool.map(run, range(B)))
    return np.array(out)


def profiled_fit(fit, beta_hat=None):
    """Refit the local-linear regression of ``dy_t`` on ``w_{t-1} = [y_{t-1}' beta, dx_{t-1}']'``.

    The coefficients of the refit are ``[alpha(tau), Gamma(tau)]`` directly,
    estimated in the same regression form as the bootstrap null model.
    """
    fr = fit.frame
    w = plug_in_regressors(fr, beta_hat)
    frame = RegressorFrame(t0=fr.t0, T=fr.T, p=fr.p, dy=fr.dy, hreg=w, tau=fr.tau)
    return fit_frame(frame, fit.h)


def coefficient_path(fit):
    """``vec`` of every grid point's coefficient matrix (column-major)."""
    return np.swapaxes(fit.coef, 1, 2).reshape(fit.coef.shape[0], -1)


def stability_test(fit, restriction, r, beta_hat=None, B=1000, seed=0, level=0.05,
                   threads=None, boot_stats=None, estimator="profiled"):
    """Constancy test of ``C b(tau)`` with bootstrap critical values.

    ``level`` is the nominal size.  With ``estimator="profiled"`` (default)
    ``b(tau)`` comes from :func:`profiled_fit`, the regression on the
    estimated error-correction term and lagged differences, matching the
    bootstrap model; ``estimator="pi"`` takes ``alpha`` as the first ``r``
    columns of the unrestricted ``Pi`` path.  Precomputed ``boot_stats`` (from
    :func:`bootstrap_stability` with the same dimensions, bandwidth and
    restriction) skip the bootstrap.
    """
    if r >= 1 and beta_hat is None:
        raise ConfigError("beta_hat is required when r >= 1")
    if not 0.0 < level < 1.0:
        raise ConfigError("level must lie in (0, 1)")
    if estimator == "profiled":
        pf = profiled_fit(fit, beta_hat if r >= 1 else None)
        bp = coefficient_path(pf)
        design = design_for(fit.T, fit.t0, fit.h)
        H = h_path(sigma_w_path(pf.frame.hreg, design), pf.Omega, restriction.C)
    elif estimator == "pi":
        bp = b_path(fit, r)
        H = h_weight(fit, beta_hat=beta_hat if r >= 1 else None, restriction=restriction)
    else:
        raise ConfigError(f"unknown estimator {estimator!r}")
    q, c = q_statistic(bp, restriction, H)
    q_star = normalized_q(q, restriction.s, fit.T, fit.h)
    if boot_stats is None:
        boot_stats = bootstrap_stability((fit.d, r, fit.p), restriction, fit.h, B=B,
                                         seed=seed, T=fit.T, threads=threads)
    boot_stats = np.asarray(boot_stats, dtype=float)
    crit = empirical_quantile(boot_stats, 1.0 - level)
    p_value = (1.0 + np.sum(boot_stats >= q)) / (boot_stats.shape[0] + 1.0)
    return StabilityReport(q_hat=q, q_star=q_star, c_used=c, B=boot_stats.shape[0],
                           boot_stats=boot_stats, crit=crit, alpha_level=level,
                           reject=bool(q > crit), seed=int(seed), p_value=float(p_value))


# -- residual diagnostics -----------------------------------------------------

def standardized_residuals(fit):
    """``Omega(tau_t)^(-1/2) u_t`` using the symmetric inverse square root."""
    if fit.Omega is None:
        estimate_omega(fit)
    return np.einsum("tij,tj->ti", inv_sqrt_psd(fit.Omega), fit.residuals)


def bg_lm_test(eps):
    """First-order multivariate Breusch-Godfrey LM test on standardised residuals.

    ``stat = n tr(S01 S11^-1 S10 S00^-1)`` from the pairs
    ``(eps_t, eps_{t-1})``; chi-square with ``d^2`` degrees of freedom.
    """
    e = np.asarray(eps, dtype=float)
    if e.ndim == 1:
        e = e[:, None]
    e0, e1 = e[1:], e[:-1]
    n, d = e0.shape
    S00 = e0.T @ e0 / n
    S11 = e1.T @ e1 / n
    S01 = e0.T @ e1 / n
    for S in (S00, S11):
        lam = np.linalg.eigvalsh(S)
        if lam[0] <= 1e-12 * max(lam[-1], np.finfo(float).tiny):
            raise SingularMoments("residual moment matrix is singular")
    A = np.linalg.solve(S11, S01.T)          # S11^-1 S10
    stat = float(n * np.trace(S01 @ A @ np.linalg.inv(S00)))
    df = d * d
    return {"stat": stat, "df": df, "p_value": float(stats.chi2.sf(stat, df))}
