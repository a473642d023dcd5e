"""
Fitting a time-varying error-correction model
=============================================

Simulate a bivariate system with one cointegrating relation and adjustment
speeds that drift over the sample, then walk through the estimation steps:
bandwidth, lag order, rank, coefficient paths and the long-run relation.
"""
import numpy as np

from tvvecm import cv_bandwidth, fit_constant_vecm, fit_paths, pointwise_ci
from tvvecm import select_lag, select_rank, wls_beta_star
from tvvecm.mcharness import DgpSpec, alpha_dgp1, simulate_path
from tvvecm.stabtest import bg_lm_test, standardized_residuals

# 400 observations; the true relation is y1 - 0.8 y2
panel = simulate_path(DgpSpec("dgp1", 400), seed=11)
print("panel:", panel.T, "rows,", panel.d, "series")

# lag order from the penalised information criterion
lag = select_lag(panel, P=4)
print("IC by lag:", np.round(lag.ic, 4), "-> p =", lag.p_hat)

# leave-one-out cross validation picks the bandwidth
h = cv_bandwidth(panel, lag.p_hat)
print(f"cross-validated bandwidth h = {h:.3f}")

# rank from the ratio of trailing row norms of a pivoted QR
rank = select_rank(panel, lag.p_hat, h)
print("mu:", np.round(rank.mu, 5), "threshold:", round(rank.w_T, 4), "-> r =", rank.r_hat)

# coefficient paths and pointwise bands
fit = fit_paths(panel, lag.p_hat, h)
bands = pointwise_ci(fit)
mid = fit.grid.shape[0] // 2
tau = fit.grid[mid]
print(f"\nat tau = {tau:.2f}")
print("  alpha_hat :", np.round(fit.Pi[mid, :, 0], 3))
print("  band lo   :", np.round(bands.lower[mid, :, 0], 3))
print("  band hi   :", np.round(bands.upper[mid, :, 0], 3))
print("  truth     :", np.round(alpha_dgp1(tau)[:, 0], 3))

# the long-run relation is constant and estimated at a faster rate
coint = wls_beta_star(panel, fit, rank.r_hat)
print(f"\nbeta* = {coint.beta_star[0, 0]:.4f}  95% CI "
      f"[{coint.lower[0, 0]:.4f}, {coint.upper[0, 0]:.4f}]  (truth -0.8)")

# a constant-parameter fit for comparison
const = fit_constant_vecm(panel, lag.p_hat, rank.r_hat)
print(f"constant-parameter beta* = {const.beta_star[0, 0]:.4f}")

# residual autocorrelation check on the standardised residuals
bg = bg_lm_test(standardized_residuals(fit))
print(f"Breusch-Godfrey LM = {bg['stat']:.2f} on {bg['df']} df, p = {bg['p_value']:.3f}")
