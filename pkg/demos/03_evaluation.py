"""Quantitative check: do PPs keep the class and do PNs change it?

Each PP is fed to the classifier on its own, and each PN is added to its
input and fed back. Rates are computed over the solves that succeeded.
"""

from cem import Example, SolverConfig, TrainConfig, evaluate, train_classifier
from cem.datasets import make_blobs
from cem.evaluate import format_summary, format_table

X, y = make_blobs(200, seed=0)
net = train_classifier(X, y, hidden=(), cfg=TrainConfig(epochs=100, learning_rate=0.5, batch_size=20, seed=0)).model

Xt, _ = make_blobs(10, seed=1)
examples = [Example.from_model(x, net, str(i)) for i, x in enumerate(Xt)]
report = evaluate(examples, net, cfg=SolverConfig())

print(format_table(report))
print(format_summary(report))
