"""Single-machine mean estimation under a bit budget.

A machine holding n samples in [0, 1] sends only its quantized sample mean.
This script sweeps the budget and compares the measured risk with the
metric-entropy lower bound and the 2/n guarantee at budget ceil(log2 n).
"""

import numpy as np

from distest import bounds
from distest.families import BoundedProductSpec
from distest.protocols import estimate_risk

n = 1024
trials = 2000
spec = BoundedProductSpec(np.array([0.2]), "two_point")  # Bernoulli(0.6) on [0,1]

print(f"n = {n} Bernoulli samples on one machine, {trials} trials per budget")
print(f"{'budget':>6} {'mse':>12} {'prop1 lower':>12}")
for budget in (1, 2, 4, 6, 8, 10, 14):
    rep = estimate_risk("single_mean", spec, trials=trials, seed=7,
                        m=1, n=n, budget_bits=budget)
    lower = bounds.prop1_lower(budget, bounds.unit_interval_entropy_inverse)
    print(f"{budget:>6} {rep.mse_mean:>12.3e} {lower.value:>12.3e}")

rep = estimate_risk("single_mean", spec, trials=trials, seed=7,
                    m=1, n=n, budget_bits=10)
print(f"\nat budget ceil(log2 n) = 10 bits: mse = {rep.mse_mean:.3e} "
      f"<= 2/n = {2 / n:.3e}")
