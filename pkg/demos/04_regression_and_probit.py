"""Distributed regression, probit regression, and the two reductions.

Local least squares (or local probit MLE), truncated to [-1, 1]^d, quantized
to accuracy 1/(mn), then averaged. The script also demonstrates the reduction
chain: Gaussian mean observations can be re-noised into faithful regression
responses, and regression responses threshold into exact probit bits.
"""

import numpy as np
from scipy.stats import norm

from distest.designs import build_designs
from distest.families import (ProbitSpec, RegressionSpec, design_eigenbounds,
                              reduce_mean_to_regression,
                              reduce_regression_to_probit)
from distest.protocols import estimate_risk

d, m, n, sigma = 3, 10, 30, 1.0
theta = np.array([0.4, -0.2, 0.7])
designs = build_designs("orthogonal", m, n, d, seed=5)

spec = RegressionSpec(designs, theta, sigma)
rep = estimate_risk("regress_avg", spec, trials=2000, seed=31)
oracle = (sigma**2 / m**2) * sum(np.trace(np.linalg.inv(a.T @ a)) for a in designs)
print(f"regression local-average: mse {rep.mse_mean:.5f}, "
      f"exact covariance-trace oracle {oracle:.5f}")
print(f"per-machine cost: {rep.bits_max // m} bits = d * ceil(log2(2mn))")

pspec = ProbitSpec(build_designs("orthogonal", 8, 200, 2, seed=6),
                   np.array([0.3, -0.4]))
prep = estimate_risk("probit_avg", pspec, trials=400, seed=33)
print(f"\nprobit local-average (m=8, n=200): mse {prep.mse_mean:.5f}, "
      f"flagged separations {prep.flagged_trials}")

# reduction 1: mean observations -> regression responses
rng = np.random.default_rng(35)
a = designs[0]
lmax2, _ = design_eigenbounds(designs)
x_mean = theta + np.sqrt(sigma**2 / (lmax2 * n)) * rng.standard_normal((50000, d))
y = reduce_mean_to_regression(x_mean, a, sigma, lmax2, rng)
print(f"\nmean->regression: empirical response mean error "
      f"{np.abs(y.mean(axis=0) - a @ theta).max():.4f}, "
      f"response variance {y.var(axis=0).mean():.4f} (target {sigma**2})")

# reduction 2: regression responses -> probit bits
z = reduce_regression_to_probit(y[:, 0])
p_hat = z.mean()
p_target = norm.cdf(a[0] @ theta / sigma)
print(f"regression->probit: P(Z=1) = {p_hat:.4f}, Phi(a.theta) = {p_target:.4f}")
