"""Synthetic drifting streams: SEA (abrupt, recurring) and rotating hyperplane
(gradual)."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

SEA_THRESHOLDS = (4.0, 7.0, 4.0, 7.0)


def sea(n: int, seed: int = 0, thresholds=SEA_THRESHOLDS):
    """Three features uniform on [0, 10]; label 1 iff f1 + f2 < theta.

    ``theta`` steps through ``thresholds`` at equal-length segments.
    """
    k = len(thresholds)
    if n % k:
        raise ValueError(f"n={n} is not divisible by {k} drift segments")
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 10.0, size=(n, 3))
    theta = np.repeat(np.asarray(thresholds, dtype=float), n // k)
    y = (X[:, 0] + X[:, 1] < theta).astype(int)
    return X, y


def hyperplane(n: int, seed: int = 0, dim: int = 4, transition=(0.4, 0.6)):
    """Random-hyperplane stream with one gradual drift.

    Before ``transition[0]`` samples follow the first hyperplane, after
    ``transition[1]`` the second; in between each sample is labelled by the
    second hyperplane with probability rising linearly from 0 to 1.
    """
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 1.0, size=(n, dim))
    w1, w2 = rng.uniform(0.0, 1.0, size=(2, dim))
    # offsets put each hyperplane through the cube centre: balanced classes
    y1 = (X @ w1 > 0.5 * w1.sum()).astype(int)
    y2 = (X @ w2 > 0.5 * w2.sum()).astype(int)
    pos = np.arange(n) / n
    a, b = transition
    p2 = np.clip((pos - a) / (b - a), 0.0, 1.0)
    use2 = rng.uniform(size=n) < p2
    return X, np.where(use2, y2, y1)


GENERATORS = {"sea": sea, "hyperplane": hyperplane}


def write_csv(path, X, y, label_column: str = "label"):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"f{j + 1}" for j in range(X.shape[1])] + [label_column])
        for row, label in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + [int(label)])
    return path


def generate_synthetic(kind: str, n: int, path, seed: int = 0, label_column: str = "label"):
    try:
        gen = GENERATORS[kind]
    except KeyError:
        raise ValueError(f"unknown generator {kind!r}; choose from {sorted(GENERATORS)}") from None
    X, y = gen(n, seed=seed)
    return write_csv(path, X, y, label_column)
