"""Simulation designs and Monte Carlo experiments.

Three bivariate designs share the short-run dynamics ``Gamma_1(tau)`` and the
volatility path ``omega(tau)``:

* ``dgp1`` - one cointegrating relation, ``beta = (1, -0.8)'`` with smoothly
  varying adjustment coefficients;
* ``dgp2`` - no cointegration (``alpha = beta = 0``);
* ``stability`` - ``alpha(tau) = (-0.4, 0.4)' + b d_T (sin tau, cos pi tau)'``
  with ``d_T = T^(-1/2) h^(-1/4)``, used for size and local power.
"""
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cointegrate import wls_beta_star
from .errors import ConfigError
from .rng import stream
from .selection import select_lag, select_rank
from .stabtest import (Restriction, bootstrap_stability, empirical_quantile,
                       resolve_threads, stability_test)
from .tvestim import Panel, cv_bandwidth, fit_paths, pointwise_ci

BETA = np.array([1.0, -0.8])
DGP_KINDS = ("dgp1", "dgp2", "stability")


def gamma1(tau):
    return np.array([
        [0.5 * np.exp(tau - 0.5), -0.2 * np.exp(tau - 1.0)],
        [-0.2 * np.cos(np.pi * tau), 0.6 * np.exp(-tau - 0.5)],
    ])


def omega(tau):
    return np.array([
        [0.8 * np.exp(-0.5 * tau) + 0.5, 0.0],
        [0.1 * np.exp(0.5 - tau), 0.5 * (tau - 0.5) ** 2 + 1.0],
    ])


def alpha_dgp1(tau):
    return np.array([[0.2 * np.sin(tau) - 0.5], [0.2 * np.cos(tau) + 0.4]])


def d_T(T, h):
    return T ** -0.5 * h ** -0.25


@dataclass(frozen=True)
class DgpSpec:
    """Simulation design.

    ``b`` and ``h_dT`` only matter for ``kind="stability"``; ``h_dT`` is the
    bandwidth entering ``d_T`` and defaults to ``T**(-1/5)``.  ``gamma_fn`` and
    ``omega_fn`` replace the default coefficient paths (test hooks).
    """

    kind: str
    T: int
    burn_in: int = 200
    b: float = 0.0
    h_dT: float = None
    gamma_fn: object = None
    omega_fn: object = None

    def __post_init__(self):
        if self.kind not in DGP_KINDS:
            raise ConfigError(f"unknown DGP {self.kind!r}")
        if self.T < 1 or self.burn_in < 0:
            raise ConfigError("T must be positive and burn_in nonnegative")

    def alpha(self, tau):
        if self.kind == "dgp1":
            return alpha_dgp1(tau)
        if self.kind == "dgp2":
            return np.zeros((2, 1))
        h = self.h_dT if self.h_dT is not None else self.T ** -0.2
        dev = np.array([[np.sin(tau)], [np.cos(np.pi * tau)]])
        return np.array([[-0.4], [0.4]]) + self.b * d_T(self.T, h) * dev

    @property
    def beta(self):
        return np.zeros(2) if self.kind == "dgp2" else BETA

    def gamma(self, tau):
        return (self.gamma_fn or gamma1)(tau)

    def omega(self, tau):
        return (self.omega_fn or omega)(tau)


def simulate_path(spec, seed, key=()):
    """Simulate levels ``y_1..y_T`` of a bivariate design.

    The burn-in runs with parameters frozen at ``tau = 0`` from ``y = 0``,
    ``dy = 0`` and is discarded.  ``key`` extends the random-stream key
    (replicate index, cell id, ...).
    """
    key = tuple(key) if isinstance(key, (tuple, list)) else (key,)
    rng = stream(seed, *key)
    nb, T = spec.burn_in, spec.T
    eps = rng.standard_normal((nb + T, 2))
    beta = spec.beta

    def coefs(tau):
        return spec.alpha(tau)[:, 0], spec.gamma(tau), spec.omega(tau)

    y = np.zeros(2)
    dy = np.zeros(2)
    a0, g0, w0 = coefs(0.0)
    for i in range(nb):
        dy = a0 * (beta @ y) + g0 @ dy + w0 @ eps[i]
        y = y + dy
    out = np.empty((T, 2))
    for t in range(1, T + 1):
        a, g, w = coefs(t / T)
        dy = a * (beta @ y) + g @ dy + w @ eps[nb + t - 1]
        y = y + dy
        out[t - 1] = y
    return Panel(out, ("y1", "y2"))


# -- experiment orchestration -------------------------------------------------

_KIND_ID = {k: i for i, k in enumerate(DGP_KINDS)}
_BOOT_TAG = 3


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.

    ``bandwidth`` is ``"cv"`` or a multiplier ``a`` giving ``h = a T^(-1/5)``.
    ``levels`` are the nominal sizes reported by the stability experiment.
    ``dT_rule`` picks the bandwidth inside ``d_T``: ``"cell"`` uses the
    cell's own ``a T^(-1/5)``, ``"center"`` always ``T^(-1/5)``.
    """

    reps: int = 200
    seed: int = 0
    bandwidth: object = "cv"
    B: int = 199
    levels: tuple = (0.05, 0.10)
    workers: object = None
    dT_rule: str = "cell"

    def __post_init__(self):
        if int(self.reps) < 1:
            raise ConfigError("reps must be at least 1")
        if self.bandwidth != "cv" and not float(self.bandwidth) > 0:
            raise ConfigError("bandwidth must be 'cv' or a positive multiplier")
        if self.dT_rule not in ("cell", "center"):
            raise ConfigError(f"unknown dT_rule {self.dT_rule!r}")

    def h_for(self, T, panel=None, p=None):
        if self.bandwidth == "cv":
            return cv_bandwidth(panel, p)
        return float(self.bandwidth) * T ** -0.2

    def to_dict(self):
        return {"reps": int(self.reps), "seed": int(self.seed), "bandwidth": self.bandwidth,
                "B": int(self.B), "levels": list(self.levels), "dT_rule": self.dT_rule}


@dataclass
class McReport:
    experiment: str
    cells: list
    reps: int
    seed: int
    wall_clock: float
    config: dict = field(default_factory=dict)
    per_rep: dict = field(default_factory=dict, repr=False)

    def cell(self, **match):
        for c in self.cells:
            if all(c.get(k) == v for k, v in match.items()):
                return c
        raise KeyError(match)

    def to_dict(self):
        return {"experiment": self.experiment, "reps": int(self.reps), "seed": int(self.seed),
                "config": self.config, "cells": self.cells, "wall_clock": self.wall_clock}


def _map(fn, tasks, workers):
    """Ordered map, in-process or over worker processes."""
    n = min(resolve_threads(workers), len(tasks))
    if n <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(n) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * n))))


def _panel(kind, T, seed, rep, b=0.0, h_dT=None):
    # streams are keyed by (T, rep) only, so designs share draws across
    # kinds and b values (common random numbers)
    return simulate_path(DgpSpec(kind, T, b=b, h_dT=h_dT), seed, key=(T, rep))


# lag table

def _lag_rep(task):
    kind, T, seed, rep, P = task
    return select_lag(_panel(kind, T, seed, rep), P=P).p_hat


def run_lag_table(cfg, kinds=("dgp1", "dgp2"), Ts=(200, 400, 800), P=4):
    """Fractions of ``p_hat < 2``, ``= 2`` and ``> 2`` per design and sample size."""
    t0 = time.perf_counter()
    cells, per = [], {}
    for kind in kinds:
        for T in Ts:
            tasks = [(kind, T, cfg.seed, i, P) for i in range(cfg.reps)]
            ph = np.array(_map(_lag_rep, tasks, cfg.workers))
            per[(kind, T)] = ph
            cells.append({"dgp": kind, "T": T, "p_lt_2": float(np.mean(ph < 2)),
                          "p_eq_2": float(np.mean(ph == 2)), "p_gt_2": float(np.mean(ph > 2))})
    return McReport("lag", cells, cfg.reps, cfg.seed, time.perf_counter() - t0,
                    cfg.to_dict(), per)


# rank table

def _rank_rep(task):
    kind, T, seed, rep, p, bw = task
    panel = _panel(kind, T, seed, rep)
    h = cv_bandwidth(panel, p) if bw == "cv" else float(bw) * T ** -0.2
    return select_rank(panel, p, h).r_hat


def run_rank_table(cfg, kinds=("dgp1", "dgp2"), Ts=(200, 400, 800), p=2):
    """Fractions of ``r_hat = 0``, ``1`` and ``2`` (lag order fixed at ``p``)."""
    t0 = time.perf_counter()
    cells, per = [], {}
    for kind in kinds:
        for T in Ts:
            tasks = [(kind, T, cfg.seed, i, p, cfg.bandwidth) for i in range(cfg.reps)]
            rh = np.array(_map(_rank_rep, tasks, cfg.workers))
            per[(kind, T)] = rh
            cells.append({"dgp": kind, "T": T, "r_eq_0": float(np.mean(rh == 0)),
                          "r_eq_1": float(np.mean(rh == 1)), "r_eq_2": float(np.mean(rh == 2))})
    return McReport("rank", cells, cfg.reps, cfg.seed, time.perf_counter() - t0,
                    cfg.to_dict(), per)


# RMSE and coverage

def _rmse_rep(task):
    T, seed, rep, bw, level = task
    panel = _panel("dgp1", T, seed, rep)
    h = cv_bandwidth(panel, 2) if bw == "cv" else float(bw) * T ** -0.2
    fit = fit_paths(panel, 2, h)
    bands = pointwise_ci(fit, level)
    coint = wls_beta_star(panel, fit, 1, level=level)
    tau = fit.grid
    a_true = np.stack([alpha_dgp1(t)[:, 0] for t in tau])
    g_true = np.stack([gamma1(t) for t in tau])
    a_hat, g_hat = fit.Pi[:, :, 0], fit.Gamma
    a_cov = (bands.lower[:, :, 0] <= a_true) & (a_true <= bands.upper[:, :, 0])
    g_cov = (bands.lower[:, :, 2:] <= g_true) & (g_true <= bands.upper[:, :, 2:])
    b_true = BETA[1] / BETA[0]
    b_hat = float(coint.beta_star[0, 0])
    return {"a_sse": float(np.sum((a_hat - a_true) ** 2)),
            "g_sse": float(np.sum((g_hat - g_true) ** 2)),
            "b_err": b_hat - b_true, "n": tau.shape[0],
            "a_cov": float(a_cov.mean()), "g_cov": float(g_cov.mean()),
            "b_cov": float(coint.lower[0, 0] <= b_true <= coint.upper[0, 0]), "h": h}


def run_rmse_coverage(cfg, Ts=(200, 400, 800), level=0.95):
    """RMSE and average pointwise coverage of ``alpha``, ``beta_star`` and ``Gamma_1`` (DGP 1).

    RMSE is ``sqrt(sum_reps sum_t ||theta_hat(tau_t) - theta(tau_t)||^2 / (reps n))``
    with ``n`` grid points per replicate.
    """
    t0 = time.perf_counter()
    cells, per = [], {}
    for T in Ts:
        tasks = [(T, cfg.seed, i, cfg.bandwidth, level) for i in range(cfg.reps)]
        res = _map(_rmse_rep, tasks, cfg.workers)
        per[T] = res
        n = sum(r["n"] for r in res)
        cells.append({
            "T": T,
            "rmse_alpha": float(np.sqrt(sum(r["a_sse"] for r in res) / n)),
            "rmse_beta": float(np.sqrt(np.mean([r["b_err"] ** 2 for r in res]))),
            "rmse_gamma": float(np.sqrt(sum(r["g_sse"] for r in res) / n)),
            "cov_alpha": float(np.mean([r["a_cov"] for r in res])),
            "cov_beta": float(np.mean([r["b_cov"] for r in res])),
            "cov_gamma": float(np.mean([r["g_cov"] for r in res])),
            "mean_h": float(np.mean([r["h"] for r in res])),
        })
    return McReport("rmse_coverage", cells, cfg.reps, cfg.seed, time.perf_counter() - t0,
                    {**cfg.to_dict(), "level": level}, per)


# size and power

def _boot_seed(seed, T, rep):
    ss = np.random.SeedSequence([int(seed), _BOOT_TAG, int(T), int(rep)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _size_rep(task):
    T, seed, rep, a, bs, B, levels, dT_rule = task
    h = a * T ** -0.2
    h_dT = h if dT_rule == "cell" else T ** -0.2
    R = Restriction.alpha_block(2, 1, 2)
    boot = bootstrap_stability((2, 1, 2), R, h, B=B, seed=_boot_seed(seed, T, rep), T=T,
                               threads=1)
    crits = [empirical_quantile(boot, 1.0 - lv) for lv in levels]
    out = []
    for b in bs:
        panel = _panel("stability", T, seed, rep, b=b, h_dT=h_dT)
        fit = fit_paths(panel, 2, h)
        beta = wls_beta_star(panel, fit, 1).beta
        rep_ = stability_test(fit, R, 1, beta_hat=beta, boot_stats=boot)
        out.append([rep_.q_hat > c for c in crits])
    return out


def run_size_power(cfg, bs=(0.0, 1.0, 2.0), multipliers=(1.0,), Ts=(400,)):
    """Rejection rates of the constancy test for ``alpha`` under local alternatives.

    For each ``(T, a)`` a replicate draws one bootstrap distribution (it does
    not depend on the data) and tests every ``b`` on panels that share the
    replicate's innovations.  Lag order 2 and rank 1 are taken as known.
    """
    t0 = time.perf_counter()
    cells, per = [], {}
    for T in Ts:
        for a in multipliers:
            tasks = [(T, cfg.seed, i, float(a), tuple(bs), cfg.B, tuple(cfg.levels), cfg.dT_rule)
                     for i in range(cfg.reps)]
            rej = np.array(_map(_size_rep, tasks, cfg.workers), dtype=bool)  # reps x b x level
            for j, b in enumerate(bs):
                per[(T, float(a), float(b))] = rej[:, j, :]
                cell = {"T": T, "a": float(a), "h": float(a) * T ** -0.2, "b": float(b)}
                for k, lv in enumerate(cfg.levels):
                    cell[f"reject_{lv:g}"] = float(rej[:, j, k].mean())
                cells.append(cell)
    return McReport("size_power", cells, cfg.reps, cfg.seed, time.perf_counter() - t0,
                    cfg.to_dict(), per)
