"""Kernel primitives and the small dense linear algebra the estimators need.

All functions are pure.  Matrix routines accept stacks of matrices (leading
batch axes) where noted, since the estimators evaluate one small system per
grid point.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, linalg

from .errors import ConfigError, DegenerateWindow

KERNELS = ("epanechnikov",)

# Relative floor applied to P0*P2 - P1**2 before declaring a window degenerate.
_WINDOW_FLOOR = 1e-12


@dataclass(frozen=True)
class KernelConfig:
    """Kernel choice and bandwidth (in rescaled time)."""

    h: float
    kernel: str = "epanechnikov"

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if not (0.0 < self.h <= 1.0):
            raise ConfigError(f"bandwidth must lie in (0, 1], got {self.h}")


@dataclass(frozen=True)
class KernelConstants:
    c2: float
    v0: float
    CB: float


@dataclass(frozen=True)
class PivotedQrResult:
    S: np.ndarray
    R: np.ndarray
    perm: np.ndarray


def epanechnikov(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


def kernel_eval(u, cfg=None):
    """Evaluate the kernel at ``u`` (scalar or array)."""
    out = epanechnikov(u)
    return float(out) if out.ndim == 0 else out


def _convolution(v):
    # int_{-1}^{1-v} K(u) K(u+v) du
    lo, hi = -1.0, 1.0 - v
    val, _ = integrate.quad(lambda u: epanechnikov(u) * epanechnikov(u + v), lo, hi,
                            epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


@lru_cache(maxsize=None)
def _constants(kernel, epsabs):
    c2, _ = integrate.quad(lambda u: u * u * epanechnikov(u), -1.0, 1.0,
                           epsabs=epsabs, epsrel=1e-13)
    v0, _ = integrate.quad(lambda u: epanechnikov(u) ** 2, -1.0, 1.0,
                           epsabs=epsabs, epsrel=1e-13)
    cb, _ = integrate.quad(lambda v: _convolution(v) ** 2, 0.0, 2.0,
                           epsabs=epsabs, epsrel=1e-13, limit=200)
    return KernelConstants(c2=float(c2), v0=float(v0), CB=float(cb))


def kernel_constants(cfg=None, epsabs=1e-10):
    """Second moment ``c2``, roughness ``v0`` and the variance constant ``CB``.

    ``CB = int_0^2 (int_{-1}^{1-v} K(u) K(u+v) du)^2 dv`` enters the
    normalisation of the stability statistic.
    """
    kernel = cfg.kernel if cfg is not None else "epanechnikov"
    return _constants(kernel, float(epsabs))


def rescaled_time(T):
    """tau_t = t / T for t = 1..T."""
    return np.arange(1, T + 1, dtype=float) / T


def local_linear_weights(tau, h, T, tau_obs=None):
    """Local-linear equivalent kernel weights ``w_t(tau)``.

    Parameters
    ----------
    tau : float
        Evaluation point in [0, 1].
    h : float
        Bandwidth.
    T : int
        Sample size used for the ``1/(T h)`` normalisation.
    tau_obs : ndarray, optional
        Observation times; defaults to ``t / T`` for ``t = 1..T``.

    Returns
    -------
    ndarray
        Weights with ``mean(w) == 1`` and ``mean(w * (tau_obs - tau) / h) == 0``
        (means taken as ``sum / T``).
    """
    if tau_obs is None:
        tau_obs = rescaled_time(T)
    w = local_linear_weight_matrix(np.atleast_1d(float(tau)), h, T, tau_obs)
    return w[0]


def local_linear_weight_matrix(grid, h, T, tau_obs):
    """Weights ``w_t(tau_g)`` for every grid point (rows) and observation."""
    grid = np.asarray(grid, dtype=float)
    tau_obs = np.asarray(tau_obs, dtype=float)
    u = (tau_obs[None, :] - grid[:, None]) / h
    k = epanechnikov(u)
    p0 = k.sum(axis=1) / (T * h)
    p1 = (u * k).sum(axis=1) / (T * h)
    p2 = (u * u * k).sum(axis=1) / (T * h)
    det = p0 * p2 - p1 * p1
    scale = np.maximum(p0 * p2, np.finfo(float).tiny)
    bad = det <= _WINDOW_FLOOR * scale
    if np.any(bad):
        raise DegenerateWindow(
            f"bandwidth {h:g} leaves a degenerate local window at tau={grid[bad][0]:.4f}")
    return k * (p2[:, None] - u * p1[:, None]) / (h * det[:, None])


def moore_penrose_pinv(A, rtol=None, hermitian=False):
    """Moore-Penrose inverse by singular value decomposition.

    Singular values ``s <= rtol * s_max`` are treated as zero.  The default
    ``rtol`` is ``max(m, n) * eps``.  ``A`` may carry leading batch axes; the
    cutoff is then applied per matrix.  With ``hermitian=True`` the symmetric
    eigendecomposition is used (its absolute eigenvalues are the singular
    values).
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape[-2:]
    if rtol is None:
        rtol = max(m, n) * np.finfo(float).eps
    if hermitian:
        lam, V = np.linalg.eigh(A)
        s = np.abs(lam)
        smax = s.max(axis=-1, keepdims=True)
        keep = s > rtol * smax
        inv = np.where(keep, 1.0 / np.where(keep, lam, 1.0), 0.0)
        return (V * inv[..., None, :]) @ np.swapaxes(V, -1, -2)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    smax = s.max(axis=-1, keepdims=True) if s.shape[-1] else s
    keep = s > rtol * smax
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return np.swapaxes(Vt, -1, -2) @ (inv[..., :, None] * np.swapaxes(U, -1, -2))


def pivoted_qr(A):
    """QR factorisation with greedy column pivoting, ``A[:, perm] = S @ R``."""
    A = np.asarray(A, dtype=float)
    S, R, perm = linalg.qr(A, pivoting=True)
    return PivotedQrResult(S=S, R=R, perm=perm)


def trailing_row_norms(R):
    """``mu_k = sqrt(sum_{j >= k} R[k, j]**2)`` for each row ``k``."""
    R = np.asarray(R, dtype=float)
    return np.sqrt(np.sum(np.triu(R) ** 2, axis=1))


# -- symmetric helpers -------------------------------------------------------

def symmetrize(A):
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def _floored_eig(A, rel_floor):
    lam, V = np.linalg.eigh(symmetrize(A))
    d = A.shape[-1]
    tr = np.trace(A, axis1=-2, axis2=-1)[..., None]
    floor = np.maximum(rel_floor * np.abs(tr) / d, np.finfo(float).tiny)
    return np.maximum(lam, floor), V


def floor_psd(A, rel_floor=1e-8):
    """Symmetrise and raise eigenvalues to at least ``rel_floor * trace / d``."""
    lam, V = _floored_eig(A, rel_floor)
    return (V * lam[..., None, :]) @ np.swapaxes(V, -1, -2)


def inv_psd(A, rel_floor=1e-8):
    """Inverse of the floored symmetric matrix."""
    lam, V = _floored_eig(A, rel_floor)
    return (V * (1.0 / lam)[..., None, :]) @ np.swapaxes(V, -1, -2)


def inv_sqrt_psd(A, rel_floor=1e-8):
    """Symmetric inverse square root of the floored matrix."""
    lam, V = _floored_eig(A, rel_floor)
    return (V * (1.0 / np.sqrt(lam))[..., None, :]) @ np.swapaxes(V, -1, -2)
