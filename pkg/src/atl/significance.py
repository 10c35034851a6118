"""Network significance: bias/variance statistics driving hidden-unit growth
and pruning through adaptive sigma rules."""

from __future__ import annotations

import math

import numpy as np

from .network import expected_hidden, sigmoid, softmax


def sigma_factor(value: float) -> float:
    """Adaptive confidence factor in [0.75, 2]; decreases as ``value`` grows."""
    return 1.25 * math.exp(-value) + 0.75


def compute_bias_sq(expected_out, target) -> float:
    e = np.asarray(expected_out, dtype=float) - np.asarray(target, dtype=float)
    return float(np.mean(e * e))


def head_moments(net, density, weights, decoder: bool = False):
    """First and second moment proxies of a head's output under the mixture.

    The second moment replaces the hidden layer by its elementwise square.
    The classifier head is passed through softmax so both moments live on the
    probability scale of the one-hot targets.
    """
    eh = expected_hidden(net, density, weights)
    if decoder:
        return sigmoid(eh @ net.w_dec + net.d), sigmoid((eh * eh) @ net.w_dec + net.d)
    return softmax(eh @ net.w_out + net.c), softmax((eh * eh) @ net.w_out + net.c)


def compute_var(net, density, weights, decoder: bool = False) -> float:
    """Output variance proxy ``E[y^2] - E[y]^2``, clamped at zero."""
    ey, ey2 = head_moments(net, density, weights, decoder)
    return max(float(np.mean(ey2 - ey * ey)), 0.0)


class _Running:
    """Welford mean / population std plus a resettable minimum pair."""

    __slots__ = ("n", "mean", "_m2", "min_mean", "min_std")

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self._m2 = 0.0
        self.min_mean = math.inf
        self.min_std = math.inf

    @property
    def std(self) -> float:
        return math.sqrt(self._m2 / self.n) if self.n else 0.0

    def push(self, value: float):
        self.n += 1
        delta = value - self.mean
        self.mean += delta / self.n
        self._m2 += delta * (value - self.mean)
        std = self.std
        if self.mean + std < self.min_mean + self.min_std:
            self.min_mean, self.min_std = self.mean, std

    def reset_min(self):
        self.min_mean, self.min_std = self.mean, self.std


class NsTracker:
    """Running statistics of Bias^2 and Var with reset-on-trigger minima.

    The running mean/std are never reset; only the minimum trackers are, each
    time their rule fires.
    """

    def __init__(self):
        self.bias = _Running()
        self.var = _Running()
        self.last_bias = 0.0
        self.last_var = 0.0

    @property
    def samples_observed(self) -> int:
        return self.bias.n

    @property
    def chi(self) -> float:
        return sigma_factor(self.last_bias)

    @property
    def gamma(self) -> float:
        return sigma_factor(self.last_var**2)

    def update_and_check_grow(self, bias_sq: float) -> bool:
        s = self.bias
        s.push(bias_sq)
        self.last_bias = bias_sq
        fire = s.n >= 2 and s.mean + s.std >= s.min_mean + self.chi * s.min_std
        if fire:
            s.reset_min()
        return fire

    def update_and_check_prune(self, var: float) -> bool:
        s = self.var
        s.push(var)
        self.last_var = var
        fire = s.n >= 2 and s.mean + s.std >= s.min_mean + 2.0 * self.gamma * s.min_std
        if fire:
            s.reset_min()
        return fire


def select_prune_victims(hc) -> set[int]:
    """Units whose contribution falls strictly below mean - std (sample std)."""
    hc = np.asarray(hc, dtype=float)
    if hc.size < 2:
        return set()
    victims = hc < hc.mean() - hc.std(ddof=1)
    if victims.all():
        victims[np.argmax(hc)] = False
    return {int(i) for i in np.flatnonzero(victims)}
