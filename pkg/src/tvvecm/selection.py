"""Lag-length and cointegration-rank selection."""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidPenalty, NoValidBandwidth, TooFewObservations
from .numkernel import pivoted_qr, trailing_row_norms
from .tvestim import (build_regressors, cv_bandwidth, cv_criterion, cv_scores, fit_frame,
                      fit_paths)


def chi_T(T, h, scale=1.0):
    """Lag penalty ``log(log(Th))/3 * (h^4 + h^2 sqrt(log T/(Th)) + log T/(Th))``."""
    Th = T * h
    if Th <= np.e:
        raise InvalidPenalty(f"T*h = {Th:g} must exceed e")
    r = np.log(T) / Th
    return scale * np.log(np.log(Th)) / 3.0 * (h ** 4 + h ** 2 * np.sqrt(r) + r)


def w_T(T, h, scale=1.0):
    """Rank-test threshold ``log T/(Th) * log(log(Th))``."""
    Th = T * h
    if Th <= np.e:
        raise InvalidPenalty(f"T*h = {Th:g} must exceed e")
    return scale * np.log(T) / Th * np.log(np.log(Th))


@dataclass
class LagSelection:
    candidates: np.ndarray
    rss: np.ndarray
    chi_T: np.ndarray
    ic: np.ndarray
    p_hat: int
    h_per_candidate: np.ndarray

    def to_dict(self):
        return {"candidates": self.candidates.tolist(), "rss": self.rss.tolist(),
                "chi_T": self.chi_T.tolist(), "ic": self.ic.tolist(),
                "p_hat": int(self.p_hat), "h": self.h_per_candidate.tolist()}


@dataclass
class RankSelection:
    mu: np.ndarray
    mu0: float
    w_T: float
    ratios: np.ndarray
    r_hat: int
    p: int
    h: float

    def to_dict(self):
        return {"mu": self.mu.tolist(), "mu0": float(self.mu0), "w_T": float(self.w_T),
                "ratios": [float(r) if np.isfinite(r) else None for r in self.ratios],
                "r_hat": int(self.r_hat), "p": int(self.p), "h": float(self.h)}


def reference_bandwidth(T):
    return T ** -0.2


def _penalty_h(penalty_h, T, fit_h):
    if penalty_h is None or penalty_h == "reference":
        return reference_bandwidth(T)
    if penalty_h == "fit":
        return fit_h
    return float(penalty_h)


def select_lag(panel, P=4, bandwidth=None, bw_grid=None, penalty_scale=1.0,
               penalty_h=None, residuals="loo"):
    """Minimise ``IC(p) = log RSS(p) + p chi_T`` over ``p = 1..P``.

    Every candidate is fitted on the common rows ``t = P+2..T``.  The
    bandwidth is cross-validated per candidate unless ``bandwidth`` is given.
    ``RSS(p)`` averages squared leave-one-out residuals at that bandwidth
    (``residuals="loo"``, the cross-validation criterion over ``T``) or
    in-sample residuals (``"fit"``).  In-sample RSS rewards whichever
    candidate drew the smaller bandwidth, so it tends to overfit.
    ``chi_T`` is evaluated at ``penalty_h``: the reference bandwidth
    ``T**(-1/5)`` by default, ``"fit"`` for each candidate's own bandwidth, or
    a number.
    """
    P = int(P)
    if P < 1:
        raise ConfigError("P must be at least 1")
    if residuals not in ("loo", "fit"):
        raise ConfigError(f"residuals must be 'loo' or 'fit', got {residuals!r}")
    T = panel.T
    t0 = P + 2
    if T - t0 + 1 < 2 * (2 * panel.d * P + 2):
        raise TooFewObservations(f"T={T} too small for P={P}")
    cands = np.arange(1, P + 1)
    rss = np.empty(P)
    chis = np.empty(P)
    hs = np.empty(P)
    for i, p in enumerate(cands):
        frame = build_regressors(panel, p, t0=t0)
        if bandwidth is None:
            grid, scores = cv_scores(frame, p, grid=bw_grid)
            if not np.any(np.isfinite(scores)):
                raise NoValidBandwidth("every candidate bandwidth gives a degenerate window")
            best = np.min(scores)
            h = float(np.min(grid[scores == best]))
            cv = best
        else:
            h = float(bandwidth)
            cv = cv_criterion(frame, h) if residuals == "loo" else None
        if residuals == "loo":
            rss[i] = cv / T
        else:
            rss[i] = np.sum(fit_frame(frame, h, omega=False).residuals ** 2) / T
        chis[i] = chi_T(T, _penalty_h(penalty_h, T, h), penalty_scale)
        hs[i] = h
    ic = np.log(rss) + cands * chis
    p_hat = int(cands[np.argmin(ic)])
    return LagSelection(cands, rss, chis, ic, p_hat, hs)


def rank_from_mu(mu, wT):
    """Ratio rule: argmax over ``r`` of ``mu_r/mu_{r+1}`` (or 1 below ``w_T``).

    ``mu`` is sorted nonincreasing first and ``mu_0 = mu_1 + w_T``.  Ties
    resolve to the smallest ``r``.
    """
    mu = np.sort(np.asarray(mu, dtype=float))[::-1]
    d = mu.shape[0]
    ext = np.concatenate([[mu[0] + wT], mu])
    ratios = np.empty(d)
    for r in range(d):
        num, den = ext[r], ext[r + 1]
        if num < wT:
            ratios[r] = 1.0
        elif den > 0:
            with np.errstate(over="ignore"):
                ratios[r] = num / den
        else:
            ratios[r] = np.inf
    return mu, float(ext[0]), ratios, int(np.argmax(ratios))


def rank_from_pi(pi_bar, T, h, threshold_scale=1.0):
    """Rank selection from an averaged ``Pi`` matrix."""
    qr = pivoted_qr(np.asarray(pi_bar, dtype=float).T)
    wT = w_T(T, h, threshold_scale)
    mu, mu0, ratios, r_hat = rank_from_mu(trailing_row_norms(qr.R), wT)
    return mu, mu0, wT, ratios, r_hat


def select_rank(panel, p, cfg=None, fit=None, threshold_scale=1.0, penalty_h=None):
    """Singular-value-ratio rank choice from the pivoted QR of the averaged ``Pi'``.

    ``cfg`` is a bandwidth or ``KernelConfig``; when omitted it is
    cross-validated.  A precomputed ``fit`` may be supplied instead.  The
    threshold ``w_T`` uses ``penalty_h`` as in :func:`select_lag`.
    """
    if fit is None:
        h = cfg if cfg is not None else cv_bandwidth(panel, p)
        fit = fit_paths(panel, p, h, omega=False)
    hw = _penalty_h(penalty_h, fit.T, fit.h)
    mu, mu0, wT, ratios, r_hat = rank_from_pi(fit.ybar_pi, fit.T, hw, threshold_scale)
    return RankSelection(mu=mu, mu0=mu0, w_T=wT, ratios=ratios, r_hat=r_hat, p=fit.p, h=fit.h)
