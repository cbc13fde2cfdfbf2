"""The projected FISTA core against a closed-form answer.

For g(d) = (d - a)^2 the minimizer of g(d) + beta |d| over [0, 1] is the
soft-threshold of a at beta / 2, clipped to the box. The iteration uses the
same square-root step decay as the explanation solver.
"""

import numpy as np

from cem.solver import fista

a = np.array([0.3, -0.2, 1.4, 0.04])
beta = 0.1
closed_form = np.clip(np.sign(a) * np.maximum(np.abs(a) - beta / 2, 0.0), 0.0, 1.0)

trace = []
out = fista(lambda d: 2 * (d - a), np.zeros(4), np.ones(4), beta, 1000, 0.4, lambda k, d: trace.append(d.copy()))

print("closed form:", closed_form)
print("fista      :", out)
for k in (1, 10, 100, 1000):
    print(f"  iterate {k:4d}: max error {np.max(np.abs(trace[k - 1] - closed_form)):.2e}")
