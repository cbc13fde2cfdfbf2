"""Pertinent positives and negatives on two 2-D Gaussian blobs.

A linear classifier separates the blobs along the diagonal. For a point of
class 0 (large x1, small x2) the pertinent negative says how much x2 would
have to be raised to change the prediction; the pertinent positive keeps the
smallest part of the existing signal that still yields class 0.
"""

import numpy as np

from cem import Example, SolverConfig, TrainConfig, explain, predict, train_classifier
from cem.datasets import make_blobs

np.set_printoptions(precision=3, suppress=True)

X, y = make_blobs(200, seed=0)
fit = train_classifier(X, y, hidden=(), cfg=TrainConfig(epochs=100, learning_rate=0.5, batch_size=20, seed=0))
net = fit.model
print(f"training accuracy: {fit.accuracy:.3f}")

# %% explain a few held-out points with the default solver settings
Xt, _ = make_blobs(4, seed=1)
for i, x in enumerate(Xt):
    expl = explain(Example.from_model(x, net, str(i)), net, cfg=SolverConfig())
    print()
    print(f"x0 = {x}, scores {predict(net, x)}")
    print(f"  PP  delta = {expl.pp.delta}  -> class {expl.pp.achieved_class} (success={expl.pp.success})")
    print(f"  PN  delta = {expl.pn.delta}  -> class {expl.pn_target_class} (success={expl.pn.success})")
    print(f"  {expl.narrative}")

# %% the c search: loss weight per search and whether the hinge reached its floor
print()
print("PN candidate log for the last example (search, elastic-net value, success):")
for entry in expl.pn.candidate_log:
    print("  ", entry)
