"""Local-linear estimation of the time-varying short-run coefficients.

The model is

    dy_t = Pi(tau_t) y_{t-1} + sum_j Gamma_j(tau_t) dy_{t-j} + u_t,

estimated by kernel-weighted least squares with a local-linear term in
rescaled time.  Every grid point solves one small ``2k x 2k`` system with
``k = d * p``; the systems are assembled and inverted as stacks.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from .errors import (DataError, DegenerateWindow, NoValidBandwidth,
                     TooFewObservations)
from .numkernel import (KernelConfig, epanechnikov, floor_psd,
                        kernel_constants, local_linear_weight_matrix,
                        moore_penrose_pinv)

K_AT_ZERO = 0.75
OMEGA_FLOOR = 1e-8


@dataclass(frozen=True)
class Panel:
    """Observed levels, one row per period."""

    values: np.ndarray
    columns: tuple = ()
    labels: tuple = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise DataError("panel values must be a T x d matrix")
        if not np.all(np.isfinite(v)):
            raise DataError("panel contains non-finite values")
        if v.shape[0] < 2:
            raise TooFewObservations(f"need at least 2 rows, got {v.shape[0]}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        cols = tuple(self.columns) or tuple(f"y{i + 1}" for i in range(v.shape[1]))
        if len(cols) != v.shape[1]:
            raise DataError("column names do not match the number of series")
        object.__setattr__(self, "columns", cols)

    @property
    def T(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def reorder(self, order):
        """Return a panel with columns permuted (names or integer positions)."""
        idx = [self.columns.index(c) if isinstance(c, str) else int(c) for c in order]
        if sorted(idx) != list(range(self.d)):
            raise DataError(f"column order {order!r} is not a permutation")
        return Panel(self.values[:, idx], tuple(self.columns[i] for i in idx), self.labels)


@dataclass(frozen=True)
class RegressorFrame:
    """Responses and lagged regressors on the effective sample.

    Row ``k`` holds ``dy_{t0+k}`` and ``h_{t0+k-1} = [y', dy'_{-1}, ...]'``
    (``t`` is 1-based).
    """

    t0: int
    T: int
    p: int
    dy: np.ndarray
    hreg: np.ndarray
    tau: np.ndarray

    @property
    def d(self):
        return self.dy.shape[1]

    @property
    def n(self):
        return self.dy.shape[0]

    @property
    def ylag(self):
        return self.hreg[:, :self.d]

    @property
    def dxlag(self):
        return self.hreg[:, self.d:]


def build_regressors(panel, p, t0=None):
    """Lag construction for a VECM with ``p - 1`` lagged differences.

    ``t0`` (1-based) defaults to ``p + 1``, the first period with all lags
    available; a later start trims the sample, e.g. to compare lag orders on
    common rows.
    """
    y = panel.values if isinstance(panel, Panel) else np.asarray(panel, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    T, d = y.shape
    p = int(p)
    if p < 1:
        raise DataError("lag count p must be at least 1")
    if T <= p + 10:
        raise TooFewObservations(f"T={T} too small for p={p}")
    if t0 is None:
        t0 = p + 1
    if t0 < p + 1:
        raise DataError(f"t0={t0} leaves missing lags for p={p}")
    t = np.arange(t0, T + 1)
    dy = y[t - 1] - y[t - 2]
    cols = [y[t - 2]]
    for j in range(1, p):
        cols.append(y[t - j - 1] - y[t - j - 2])
    hreg = np.hstack(cols)
    return RegressorFrame(t0=int(t0), T=T, p=p, dy=dy, hreg=hreg, tau=t / T)


# -- kernel design cache -----------------------------------------------------

class KernelDesign:
    """Kernel evaluations between a grid and the observation times."""

    def __init__(self, grid, tau_obs, h, T):
        self.grid = np.asarray(grid, dtype=float)
        self.tau_obs = np.asarray(tau_obs, dtype=float)
        self.h = float(h)
        self.T = int(T)
        u = (self.tau_obs[None, :] - self.grid[:, None]) / self.h
        k = epanechnikov(u)
        self.K = k
        self.ksum = k.sum(axis=1)
        self.count = np.count_nonzero(k, axis=1)
        self.stack = np.vstack([k, k * u, k * u * u])
        self._weights = None
        self._stack_sq = None
        for a in (self.K, self.ksum, self.stack):
            a.setflags(write=False)

    @property
    def on_obs(self):
        return self.grid.shape == self.tau_obs.shape and np.array_equal(self.grid, self.tau_obs)

    @property
    def weights(self):
        if self._weights is None:
            w = local_linear_weight_matrix(self.grid, self.h, self.T, self.tau_obs)
            w.setflags(write=False)
            self._weights = w
        return self._weights

    @property
    def stack_sq(self):
        """Squared-kernel moments ``K^2 u^l``, l = 0, 1, 2, stacked by rows."""
        if self._stack_sq is None:
            g = self.grid.shape[0]
            k, ku, ku2 = self.stack[:g], self.stack[g:2 * g], self.stack[2 * g:]
            sq = np.vstack([k * k, k * ku, ku * ku])
            sq.setflags(write=False)
            self._stack_sq = sq
        return self._stack_sq

    def check(self, k, loo=False):
        need = 2 * k + 2 + (1 if loo else 0)
        bad = self.count < need
        if np.any(bad):
            raise DegenerateWindow(
                f"bandwidth {self.h:g}: window at tau={self.grid[bad][0]:.4f} holds "
                f"{self.count[bad][0]} observations, need {need}")


@lru_cache(maxsize=32)
def _obs_design(T, t0, h):
    tau = np.arange(t0, T + 1) / T
    return KernelDesign(tau, tau, h, T)


def design_for(T, t0, h, grid=None):
    if grid is None:
        return _obs_design(int(T), int(t0), float(h))
    tau = np.arange(t0, T + 1) / T
    return KernelDesign(np.atleast_1d(np.asarray(grid, dtype=float)), tau, h, T)


@dataclass
class LocalSolution:
    level: np.ndarray   # (g, d, k)
    slope: np.ndarray   # (g, d, k), h times the derivative
    S0: np.ndarray      # (g, k, k)
    ksum: np.ndarray    # (g,)
    gram_pinv: np.ndarray  # (g, 2k, 2k)


def local_linear_solve(response, regressors, design, loo=False, rtol=None):
    """Local-linear coefficients of ``response`` on ``regressors`` at each grid point.

    Solves ``[V0, V1] @ pinv([[S0, S1], [S1, S2]])`` for every grid point.
    With ``loo=True`` (grid must equal the observation times) observation
    ``g`` is removed from the sums at grid point ``g``.
    """
    Y = np.asarray(response, dtype=float)
    X = np.asarray(regressors, dtype=float)
    n, k = X.shape
    d = Y.shape[1]
    design.check(k, loo=loo)
    g = design.grid.shape[0]
    outer = (X[:, :, None] * X[:, None, :]).reshape(n, k * k)
    cross = (Y[:, :, None] * X[:, None, :]).reshape(n, d * k)
    A = np.hstack([outer, cross])
    M = design.stack @ A
    M0, M1, M2 = M[:g], M[g:2 * g], M[2 * g:]
    if loo:
        if not design.on_obs:
            raise ValueError("leave-one-out requires the grid to equal the observation times")
        M0 = M0 - K_AT_ZERO * A
    S0 = M0[:, :k * k].reshape(g, k, k)
    S1 = M1[:, :k * k].reshape(g, k, k)
    S2 = M2[:, :k * k].reshape(g, k, k)
    V = np.concatenate([M0[:, k * k:].reshape(g, d, k), M1[:, k * k:].reshape(g, d, k)], axis=2)
    B = np.empty((g, 2 * k, 2 * k))
    B[:, :k, :k] = S0
    B[:, :k, k:] = S1
    B[:, k:, :k] = S1
    B[:, k:, k:] = S2
    Binv = moore_penrose_pinv(B, rtol=rtol, hermitian=True)
    coef = V @ Binv
    ksum = design.ksum - (K_AT_ZERO if loo else 0.0)
    return LocalSolution(level=coef[..., :k], slope=coef[..., k:], S0=S0, ksum=ksum,
                         gram_pinv=Binv)


# -- fits ----------------------------------------------------------------------

@dataclass
class LocalLinearFit:
    p: int
    h: float
    T: int
    t0: int
    grid: np.ndarray
    coef: np.ndarray          # (g, d, d*p) = [Pi, Gamma]
    slopes: np.ndarray
    residuals: np.ndarray     # (n, d)
    S0: np.ndarray
    ksum: np.ndarray
    gram_pinv: np.ndarray = field(repr=False)
    frame: RegressorFrame
    Omega: np.ndarray = None
    SigmaCo: np.ndarray = field(default=None, repr=False)

    @property
    def d(self):
        return self.coef.shape[1]

    @property
    def Pi(self):
        return self.coef[:, :, :self.d]

    @property
    def Gamma(self):
        return self.coef[:, :, self.d:]

    @property
    def ybar_pi(self):
        return self.Pi.mean(axis=0)

    @property
    def cfg(self):
        return KernelConfig(h=self.h)


def _h_of(cfg):
    return cfg.h if isinstance(cfg, KernelConfig) else float(cfg)


def fit_at(frame, cfg, tau, rtol=None):
    """Level and slope estimates of ``[Pi, Gamma]`` at a single ``tau``.

    Returns a dict with ``Pi``, ``Gamma``, ``Pi_slope`` and ``Gamma_slope``
    (slopes are ``h`` times the derivative in ``tau``).
    """
    h = _h_of(cfg)
    design = design_for(frame.T, frame.t0, h, grid=[tau])
    sol = local_linear_solve(frame.dy, frame.hreg, design, rtol=rtol)
    d = frame.d
    lev, slo = sol.level[0], sol.slope[0]
    return {"Pi": lev[:, :d], "Gamma": lev[:, d:], "Pi_slope": slo[:, :d],
            "Gamma_slope": slo[:, d:]}


def fit_frame(frame, cfg, rtol=None, omega=True):
    """Fit on the observation grid of an existing regressor frame."""
    h = _h_of(cfg)
    design = design_for(frame.T, frame.t0, h)
    sol = local_linear_solve(frame.dy, frame.hreg, design, rtol=rtol)
    resid = frame.dy - np.einsum("gdk,gk->gd", sol.level, frame.hreg)
    fit = LocalLinearFit(p=frame.p, h=h, T=frame.T, t0=frame.t0, grid=design.grid,
                         coef=sol.level, slopes=sol.slope, residuals=resid,
                         S0=sol.S0, ksum=sol.ksum, gram_pinv=sol.gram_pinv, frame=frame)
    if omega:
        fit = estimate_omega(fit)
    return fit


def fit_paths(panel, p, cfg, t0=None, rtol=None, omega=True):
    """Local-linear fit at every observation time ``tau_t``.

    Residuals use the coefficients estimated at each observation's own time.
    The error covariance path is attached unless ``omega=False``.
    """
    return fit_frame(build_regressors(panel, p, t0=t0), cfg, rtol=rtol, omega=omega)


def omega_path(residuals, design):
    """``Omega(tau) = T^-1 sum_t u_t u_t' w_t(tau)``, symmetrised and floored."""
    U = np.asarray(residuals, dtype=float)
    n, d = U.shape
    raw = (design.weights @ (U[:, :, None] * U[:, None, :]).reshape(n, d * d)) / design.T
    return floor_psd(raw.reshape(-1, d, d), OMEGA_FLOOR)


def estimate_omega(fit, cfg=None):
    """Attach the time-varying error covariance path to ``fit``."""
    h = fit.h if cfg is None else _h_of(cfg)
    design = design_for(fit.T, fit.t0, h)
    fit.Omega = omega_path(fit.residuals, design)
    return fit


def sigma_co(fit, cfg=None, tau=None):
    """Asymptotic covariance ``(sum_t K) S0^+ (x) Omega`` of ``vec([Pi, Gamma])``.

    With ``tau=None`` the whole grid path is returned (and cached on the
    fit); otherwise the matrix at that single point.
    """
    if fit.Omega is None:
        estimate_omega(fit)
    if tau is None:
        if fit.SigmaCo is None:
            A = fit.ksum[:, None, None] * moore_penrose_pinv(fit.S0, hermitian=True)
            fit.SigmaCo = np.einsum("gab,gij->gaibj", A, fit.Omega).reshape(
                len(fit.grid), A.shape[1] * fit.d, A.shape[1] * fit.d)
        return fit.SigmaCo
    h = fit.h if cfg is None else _h_of(cfg)
    design = design_for(fit.T, fit.t0, h, grid=[tau])
    sol = local_linear_solve(fit.frame.dy, fit.frame.hreg, design)
    omega = omega_path(fit.residuals, design)[0]
    A = sol.ksum[0] * moore_penrose_pinv(sol.S0[0], hermitian=True)
    return np.kron(A, omega)


@dataclass
class Bands:
    level: float
    estimate: np.ndarray
    se: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


def pointwise_ci(fit, level=0.95, method="sandwich"):
    """Pointwise bands for every element of ``[Pi, Gamma]`` along the grid.

    ``method="asymptotic"`` uses ``se = sqrt(v0 * Sigma_co[jj] / (T h))``.
    ``method="sandwich"`` (default) uses the finite-sample variance of the
    local-linear estimator, ``[G^+ (sum K^2 z z') G^+]_{11} (x) Omega(tau)``
    with ``G`` the local Gram matrix; the two agree at interior points as
    ``T h`` grows, but the sandwich also accounts for the boundary windows.
    The ``h^2 c2 / 2`` smoothing bias is not removed in either case.
    """
    if fit.Omega is None:
        estimate_omega(fit)
    om = np.diagonal(fit.Omega, axis1=1, axis2=2)
    if method == "asymptotic":
        v0 = kernel_constants().v0
        if fit.SigmaCo is not None:
            g = fit.SigmaCo.shape[0]
            var = np.diagonal(fit.SigmaCo, axis1=1, axis2=2).reshape(g, -1, fit.d)
            var = np.swapaxes(var, 1, 2)
        else:
            A = fit.ksum[:, None] * np.diagonal(
                moore_penrose_pinv(fit.S0, hermitian=True), axis1=1, axis2=2)
            var = om[:, :, None] * A[:, None, :]
        var = var * v0 / (fit.T * fit.h)
    elif method == "sandwich":
        var = om[:, :, None] * _sandwich_diag(fit)[:, None, :]
    else:
        raise ValueError(f"unknown band method {method!r}")
    se = np.sqrt(np.maximum(var, 0.0))
    z = stats.norm.ppf(0.5 + level / 2.0)
    est = fit.coef
    return Bands(level=level, estimate=est, se=se, lower=est - z * se, upper=est + z * se)


def _sandwich_diag(fit):
    X = fit.frame.hreg
    n, k = X.shape
    design = design_for(fit.T, fit.t0, fit.h)
    g = design.grid.shape[0]
    M = design.stack_sq @ (X[:, :, None] * X[:, None, :]).reshape(n, k * k)
    M0, M1, M2 = (M[i * g:(i + 1) * g].reshape(g, k, k) for i in range(3))
    mid = np.empty((g, 2 * k, 2 * k))
    mid[:, :k, :k] = M0
    mid[:, :k, k:] = M1
    mid[:, k:, :k] = M1
    mid[:, k:, k:] = M2
    top = fit.gram_pinv[:, :k, :]
    return np.einsum("gia,gab,gib->gi", top, mid, top)


# -- bandwidth ---------------------------------------------------------------------

def default_bandwidth_grid(T):
    """``h = a * T**(-1/5)`` for ``a = 0.6, 0.7, ..., 2.0`` (capped at 1)."""
    alphas = np.round(np.arange(6, 21) / 10.0, 1)
    return np.minimum(alphas * T ** (-0.2), 1.0)


def cv_criterion(frame, h, rtol=None):
    """Leave-one-out squared prediction error summed over the sample."""
    design = design_for(frame.T, frame.t0, h)
    sol = local_linear_solve(frame.dy, frame.hreg, design, loo=True, rtol=rtol)
    err = frame.dy - np.einsum("gdk,gk->gd", sol.level, frame.hreg)
    return float(np.sum(err * err))


def cv_scores(panel, p, grid=None, t0=None):
    """Criterion value for each candidate bandwidth (``inf`` when degenerate)."""
    frame = panel if isinstance(panel, RegressorFrame) else build_regressors(panel, p, t0=t0)
    if grid is None:
        grid = default_bandwidth_grid(frame.T)
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    scores = np.full(grid.shape, np.inf)
    for i, h in enumerate(grid):
        try:
            scores[i] = cv_criterion(frame, float(h))
        except DegenerateWindow:
            pass
    return grid, scores


def cv_bandwidth(panel, p, grid=None, t0=None):
    """Bandwidth minimising the leave-one-out criterion; ties go to the smaller ``h``."""
    grid, scores = cv_scores(panel, p, grid=grid, t0=t0)
    if not np.any(np.isfinite(scores)):
        raise NoValidBandwidth("every candidate bandwidth gives a degenerate window")
    best = np.min(scores)
    return float(np.min(grid[scores == best]))
