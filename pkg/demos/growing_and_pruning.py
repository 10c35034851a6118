"""
When does the hidden layer grow or shrink?
==========================================

Each training sample yields a squared bias and a variance estimate of the
network output.  Their running mean plus standard deviation is compared with
the best level seen since the last structural change; a jump beyond an
adaptive margin adds units (bias) or removes weak ones (variance).
"""

import numpy as np

from atl import NsTracker
from atl.significance import select_prune_victims

rng = np.random.default_rng(0)
tracker = NsTracker()

# A bias signal that settles, then jumps when the concept changes.
bias = np.concatenate([
    np.linspace(0.5, 0.05, 400) + rng.normal(0, 0.01, 400),
    np.full(200, 0.6) + rng.normal(0, 0.02, 200),
])
fires = [i for i, b in enumerate(np.clip(bias, 0, None)) if tracker.update_and_check_grow(b)]
print("grow decisions at samples:", fires[:10], "..." if len(fires) > 10 else "")
print("first decision after the jump at 400:", next(i for i in fires if i >= 400))
print("margin factor now:", round(tracker.chi, 3))

# Pruning removes units whose summed contribution is unusually small.
contribution = np.array([1.9, 2.1, 0.1, 1.7, 2.0])
print("\ncontributions", contribution, "-> prune", sorted(select_prune_victims(contribution)))
print("equal contributions -> prune", sorted(select_prune_victims(np.ones(5))))
