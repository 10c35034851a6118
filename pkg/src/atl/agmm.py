"""Autonomous Gaussian mixture: an online diagonal-Gaussian density estimator.

Components are added when a sample is both novel (compatibility test) and the
winning component has no room left to expand (vigilance test); otherwise the
winner is tuned.  Inactive components are removed with a half-sigma rule on
their accumulated matching degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

INITIAL_WIDTH = 1.0
WIDTH_FLOOR = 1e-3
SNAPSHOT_VERSION = 1


@dataclass
class GaussianComponent:
    center: np.ndarray
    width: np.ndarray
    support: int
    born: int
    matching_sum: float = 0.0


def matching_degree(comp: GaussianComponent, x) -> float:
    """Worst-dimension Gaussian membership of ``x`` in ``comp``."""
    x = np.asarray(x, dtype=float)
    z = (x - comp.center) / comp.width
    return float(np.exp(-0.5 * z * z).min())


def novelty_threshold(u: int, chi: float) -> float:
    return math.exp(-u * chi / (4.0 - 2.0 * math.exp(-u / 2.0)))


class Agmm:
    """Self-evolving mixture of diagonal Gaussians over ``input_dim`` features.

    Component state is held column-wise in numpy arrays; ``components`` gives
    a per-component view.  ``samples_seen`` is the sample counter N and each
    ``observe`` call uses it as the sample index.
    """

    def __init__(self, input_dim: int, exemption_window: int = 1000):
        if input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if exemption_window < 1:
            raise ValueError("exemption_window must be >= 1")
        self.input_dim = int(input_dim)
        self.exemption_window = int(exemption_window)
        self.samples_seen = 0
        u = self.input_dim
        self.centers = np.zeros((0, u))
        self.widths = np.zeros((0, u))
        self.supports = np.zeros(0, dtype=np.int64)
        self.born = np.zeros(0, dtype=np.int64)
        self.matching_sums = np.zeros(0)

    @property
    def n_components(self) -> int:
        return self.centers.shape[0]

    @property
    def components(self) -> list[GaussianComponent]:
        return [
            GaussianComponent(
                self.centers[i].copy(),
                self.widths[i].copy(),
                int(self.supports[i]),
                int(self.born[i]),
                float(self.matching_sums[i]),
            )
            for i in range(self.n_components)
        ]

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.input_dim:
            raise ValueError(f"expected {self.input_dim} features, got {x.shape[0]}")
        if not np.all(np.isfinite(x)):
            raise ValueError(f"non-finite sample rejected: {x!r}")
        return x

    def _append(self, x, width, sample_index):
        self.centers = np.vstack([self.centers, x])
        self.widths = np.vstack([self.widths, np.maximum(width, WIDTH_FLOOR)])
        self.supports = np.append(self.supports, 1)
        self.born = np.append(self.born, int(sample_index))
        self.matching_sums = np.append(self.matching_sums, 0.0)

    def init_from_sample(self, x, sample_index: int) -> "Agmm":
        x = self._check(x)
        if self.n_components:
            raise RuntimeError("mixture already initialised")
        self._append(x, np.full(self.input_dim, INITIAL_WIDTH), sample_index)
        self.samples_seen = max(self.samples_seen, int(sample_index))
        return self

    # -- geometry ---------------------------------------------------------

    def matching_degrees(self, x) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - self.centers) / self.widths
        return np.exp(-0.5 * z * z).min(axis=1)

    def compatibility_test(self, x, chi: float) -> bool:
        """True when ``x`` lies outside every component's zone of influence."""
        return bool(self.matching_degrees(x).max() < novelty_threshold(self.input_dim, chi))

    def find_winner(self, x) -> int:
        d2 = ((np.asarray(x, dtype=float) - self.centers) ** 2).sum(axis=1)
        return int(np.argmin(d2))  # argmin keeps the lowest index on ties

    def overlap_rho(self, winner: int) -> float:
        M = self.n_components
        if M < 2:
            return 1.0
        mu_w, sd_w = self.centers[winner], self.widths[winner]
        lo_w, hi_w = mu_w - sd_w, mu_w + sd_w
        rho = 0.0
        for m in range(M):
            if m == winner:
                continue
            mu, sd = self.centers[m], self.widths[m]
            lo, hi = mu - sd, mu + sd
            if np.any(hi < lo_w) or np.any(lo > hi_w):
                continue
            if np.all(lo >= lo_w) and np.all(hi <= hi_w):
                rho += 1.0 / (M - 1)
            else:
                reward = _ratio(mu - mu_w, mu + mu_w) + _ratio(sd - sd_w, sd + sd_w)
                rho += reward / (M - 1)
        return float(min(max(rho, 0.1), 1.0))

    def log_volumes(self) -> np.ndarray:
        # product of per-dimension variances, kept in log space
        return 2.0 * np.log(self.widths).sum(axis=1)

    def vigilance_test(self, winner: int, rho: float) -> bool:
        """True when the winner already holds at least ``rho`` of the total volume."""
        if self.n_components < 2:
            return False
        logv = self.log_volumes()
        lhs = logv[winner]
        rhs = math.log(rho) + logsumexp(logv)
        return bool(lhs >= rhs - 1e-12 * max(1.0, abs(rhs)))

    # -- structural updates ----------------------------------------------

    def add_component(self, x, sample_index: int, winner: int | None = None) -> "Agmm":
        x = self._check(x)
        if winner is None:
            winner = self.find_winner(x)
        self._append(x, np.abs(x - self.centers[winner]), sample_index)
        return self

    def tune_winner(self, winner: int, x) -> "Agmm":
        x = np.asarray(x, dtype=float)
        n = self.supports[winner] + 1
        mu = self.centers[winner] + (x - self.centers[winner]) / n
        var = self.widths[winner] ** 2
        var = var + ((x - mu) ** 2 - var) / n
        self.centers[winner] = mu
        self.widths[winner] = np.maximum(np.sqrt(var), WIDTH_FLOOR)
        self.supports[winner] = n
        return self

    def activity(self, sample_index: int) -> np.ndarray:
        life = np.maximum(sample_index - self.born, 1)
        return self.matching_sums / life

    def update_activity_and_prune(self, x, sample_index: int) -> tuple["Agmm", int]:
        """Accrue matching degrees and drop components with low activity.

        Components born at ``sample_index`` do not accrue on their birth sample,
        so an accumulated sum never exceeds the component's lifespan.
        """
        alive = self.born < sample_index
        self.matching_sums[alive] += self.matching_degrees(x)[alive]
        M = self.n_components
        if M < 2:
            return self, 0
        phi = self.activity(sample_index)
        thr = phi.mean() - 0.5 * phi.std(ddof=1)
        age = sample_index - self.born
        doomed = (phi < thr) & (age > self.exemption_window)
        if doomed.all():
            doomed[np.argmax(phi)] = False
        n_doomed = int(doomed.sum())
        if n_doomed:
            keep = ~doomed
            self.centers = self.centers[keep]
            self.widths = self.widths[keep]
            self.supports = self.supports[keep]
            self.born = self.born[keep]
            self.matching_sums = self.matching_sums[keep]
        return self, n_doomed

    # -- density ----------------------------------------------------------

    def mixing_coefficients(self, x) -> np.ndarray:
        """Posterior responsibilities of each component for ``x``.

        The likelihood normaliser uses ``sqrt(2*pi*min_j sigma_j)`` in place of
        the full covariance determinant; priors are proportional to support.
        """
        M = self.n_components
        if M == 0:
            raise ValueError("mixture has no components yet")
        if M == 1:
            return np.ones(1)
        z = (np.asarray(x, dtype=float) - self.centers) / self.widths
        log_lik = -0.5 * (z * z).sum(axis=1) - 0.5 * np.log(2 * np.pi * self.widths.min(axis=1))
        log_post = log_lik + np.log(self.supports)
        w = np.exp(log_post - logsumexp(log_post))
        if not np.all(np.isfinite(w)) or w.sum() <= 0:
            return np.full(M, 1.0 / M)
        return w / w.sum()

    def priors(self) -> np.ndarray:
        return self.supports / self.supports.sum()

    def density(self, X) -> np.ndarray:
        """Exact mixture density (full diagonal normaliser) at rows of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        z = (X[:, None, :] - self.centers[None]) / self.widths[None]
        log_norm = -0.5 * self.input_dim * np.log(2 * np.pi) - np.log(self.widths).sum(axis=1)
        log_comp = -0.5 * (z * z).sum(axis=2) + log_norm
        return np.exp(logsumexp(log_comp + np.log(self.priors()), axis=1))

    def observe(self, x, chi: float) -> "Agmm":
        x = self._check(x)
        self.samples_seen += 1
        n = self.samples_seen
        if not self.n_components:
            return self.init_from_sample(x, n)
        winner = self.find_winner(x)
        # a lone component has no vigilance verdict; novelty alone decides
        if self.compatibility_test(x, chi) and (
            self.n_components == 1 or self.vigilance_test(winner, self.overlap_rho(winner))
        ):
            self.add_component(x, n, winner)
        else:
            self.tune_winner(winner, x)
        self.update_activity_and_prune(x, n)
        return self

    # -- snapshots --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "input_dim": self.input_dim,
            "exemption_window": self.exemption_window,
            "samples_seen": self.samples_seen,
            "centers": self.centers.tolist(),
            "widths": self.widths.tolist(),
            "supports": self.supports.tolist(),
            "born": self.born.tolist(),
            "matching_sums": self.matching_sums.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Agmm":
        if d.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {d.get('version')!r}")
        g = cls(d["input_dim"], d["exemption_window"])
        u = g.input_dim
        g.samples_seen = int(d["samples_seen"])
        g.centers = np.asarray(d["centers"], dtype=float).reshape(-1, u)
        g.widths = np.asarray(d["widths"], dtype=float).reshape(-1, u)
        g.supports = np.asarray(d["supports"], dtype=np.int64)
        g.born = np.asarray(d["born"], dtype=np.int64)
        g.matching_sums = np.asarray(d["matching_sums"], dtype=float)
        return g


class RunningGaussian:
    """Single diagonal Gaussian updated incrementally; stand-in for ``Agmm``
    when the mixture is switched off."""

    def __init__(self, input_dim: int):
        self.input_dim = int(input_dim)
        self.samples_seen = 0
        self._mean = np.zeros(self.input_dim)
        self._m2 = np.zeros(self.input_dim)

    @property
    def n_components(self) -> int:
        return 1

    @property
    def centers(self) -> np.ndarray:
        return self._mean[None, :]

    @property
    def widths(self) -> np.ndarray:
        if self.samples_seen < 2:
            return np.full((1, self.input_dim), INITIAL_WIDTH)
        return np.maximum(np.sqrt(self._m2 / self.samples_seen), WIDTH_FLOOR)[None, :]

    def observe(self, x, chi: float = 0.0) -> "RunningGaussian":
        x = np.asarray(x, dtype=float)
        self.samples_seen += 1
        delta = x - self._mean
        self._mean = self._mean + delta / self.samples_seen
        self._m2 = self._m2 + delta * (x - self._mean)
        return self

    def mixing_coefficients(self, x) -> np.ndarray:
        return np.ones(1)


def _ratio(a, b) -> float:
    den = np.linalg.norm(b)
    return float(np.linalg.norm(a) / den) if den > 0 else 0.0
