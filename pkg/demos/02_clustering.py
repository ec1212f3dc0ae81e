"""Cluster seekers by how they react, with silhouette-driven model selection.

Builds a population where most seekers never react and a few react a lot,
then cross-validates KMeans, spectral clustering, affinity propagation and
mean shift and reports the winner.
"""

import numpy as np

from iwaa.clustering import cross_validate, default_grid

rng = np.random.default_rng(0)
groups = {"silent": ((0.0, 0.02, 0.0), 120), "likers": ((0.1, 0.5, 0.02), 60), "engaged": ((0.6, 0.8, 0.3), 20)}
X = np.vstack([np.clip(rng.normal(c, 0.04, (n, 3)), 0, 1) for c, n in groups.values()])

result = cross_validate(X, default_grid(), seed=0)
best = result.best
print(f"best: {best.algorithm} {best.hyperparameters}, silhouette {best.silhouette:.3f}")

ranked = sorted((s, e.algorithm, e.label()) for e, s in result.scores if s is not None)[::-1]
for s, alg, params in ranked[:5]:
    print(f"  {s:.3f}  {alg:<20} {params}")

for c in range(best.n_clusters):
    members = X[best.labels == c]
    print(f"cluster {c}: {len(members):>3} seekers, mean (retweet, like, answer) = {members.mean(0).round(2)}")
