"""Online trainer: per-chunk generative, discriminative and KL alignment phases
with structural learning of the hidden width."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .agmm import Agmm, RunningGaussian
from .network import (
    HIDDEN_AXIS,
    ElasticNetwork,
    corrupt,
    hidden_contributions,
    sigmoid,
    softmax,
)
from .significance import NsTracker, compute_bias_sq, head_moments, select_prune_victims

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-8


class ConfigurationError(ValueError):
    pass


@dataclass
class TrainerConfig:
    learning_rate: float = 0.01
    momentum: float = 0.95
    epochs_per_batch: int = 1
    noise_fraction: float = 0.1
    disable_kl: bool = False
    disable_agmm_ns: bool = False
    disable_structural: bool = False
    seed: int = 0
    exemption_window: int = 1000

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigurationError("learning_rate must be > 0")
        if not 0 <= self.momentum < 1:
            raise ConfigurationError("momentum must lie in [0, 1)")
        if int(self.epochs_per_batch) != self.epochs_per_batch or self.epochs_per_batch < 1:
            raise ConfigurationError("epochs_per_batch must be an integer >= 1")
        if not 0 <= self.noise_fraction < 1:
            raise ConfigurationError("noise_fraction must lie in [0, 1)")
        if self.exemption_window < 1:
            raise ConfigurationError("exemption_window must be >= 1")


# -- losses and gradients ----------------------------------------------------


def cross_entropy_grad(params, x, y_onehot):
    """Loss ``-log p_y`` of the softmax head and its gradient."""
    h = sigmoid(x @ params["w_in"] + params["b"])
    p = softmax(h @ params["w_out"] + params["c"])
    loss = -float(np.log(max(p @ y_onehot, 1e-300)))
    d_o = p - y_onehot
    d_z = (params["w_out"] @ d_o) * h * (1.0 - h)
    return loss, {
        "w_in": np.outer(x, d_z),
        "b": d_z,
        "w_out": np.outer(h, d_o),
        "c": d_o,
    }


def reconstruction_grad(params, x_tilde, x):
    """Squared reconstruction error of the clean ``x`` from ``x_tilde``."""
    h = sigmoid(x_tilde @ params["w_in"] + params["b"])
    r = sigmoid(h @ params["w_dec"] + params["d"])
    e = r - x
    d_o = 2.0 * e * r * (1.0 - r)
    d_z = (params["w_dec"] @ d_o) * h * (1.0 - h)
    return float(e @ e), {
        "w_in": np.outer(x_tilde, d_z),
        "b": d_z,
        "w_dec": np.outer(h, d_o),
        "d": d_o,
    }


def _normalise(pi, floor=PROB_FLOOR):
    total = pi.sum()
    p = pi / total
    q = np.maximum(p, floor)
    return p, q, q / q.sum(), total


def _normalise_back(g_Pi, p, q, Pi, total, floor=PROB_FLOOR):
    g_q = (g_Pi - g_Pi @ Pi) / q.sum()
    g_p = g_q * (p >= floor)
    return (g_p - g_p @ p) / total


def symmetric_kl(Pi_s, Pi_t) -> float:
    return float(Pi_s @ np.log(Pi_s / Pi_t) + Pi_t @ np.log(Pi_t / Pi_s))


def kl_grad(params, X_s, X_t):
    """Symmetric KL between normalised mean hidden activations of two batches.

    Gradient is returned for the encoder parameters only.
    """
    H_s = sigmoid(X_s @ params["w_in"] + params["b"])
    H_t = sigmoid(X_t @ params["w_in"] + params["b"])
    p_s, q_s, Pi_s, tot_s = _normalise(H_s.mean(axis=0))
    p_t, q_t, Pi_t, tot_t = _normalise(H_t.mean(axis=0))
    log_ratio = np.log(Pi_s / Pi_t)
    loss = float((Pi_s - Pi_t) @ log_ratio)
    g_s = log_ratio + 1.0 - Pi_t / Pi_s
    g_t = -log_ratio + 1.0 - Pi_s / Pi_t
    g_pi_s = _normalise_back(g_s, p_s, q_s, Pi_s, tot_s)
    g_pi_t = _normalise_back(g_t, p_t, q_t, Pi_t, tot_t)
    dz_s = (g_pi_s / len(X_s)) * H_s * (1.0 - H_s)
    dz_t = (g_pi_t / len(X_t)) * H_t * (1.0 - H_t)
    return loss, {
        "w_in": X_s.T @ dz_s + X_t.T @ dz_t,
        "b": dz_s.sum(axis=0) + dz_t.sum(axis=0),
    }


def sgd_step(params, grads, velocity, lr, momentum) -> bool:
    """Classical momentum update in place.  Returns False (and leaves every
    buffer untouched) when any gradient is non-finite."""
    if not all(np.all(np.isfinite(g)) for g in grads.values()):
        return False
    for k, g in grads.items():
        v = velocity[k]
        v *= momentum
        v -= lr * g
        params[k] += v
    return True


# -- state and orchestration -------------------------------------------------


@dataclass
class ChunkMetrics:
    chunk_index: int
    source_accuracy: float
    hidden_nodes: int
    agmm_source_components: int
    agmm_target_components: int
    train_seconds: float = 0.0


@dataclass
class AtlState:
    net: ElasticNetwork
    agmm_source: Agmm | RunningGaussian
    agmm_target: Agmm | RunningGaussian
    ns_disc: NsTracker = field(default_factory=NsTracker)
    ns_gen: NsTracker = field(default_factory=NsTracker)
    velocity: dict = field(default_factory=dict)
    chunk_counter: int = 0
    skipped_steps: int = 0
    grow_events: int = 0
    prune_events: int = 0

    def __post_init__(self):
        if not self.velocity:
            self.velocity = {k: np.zeros_like(v) for k, v in self.net.params.items()}


class AtlTrainer:
    """Owns one run's state; feed it chunks in stream order.

    Target batches are passed as bare feature matrices, so target labels can
    never reach training.
    """

    def __init__(self, input_dim: int, n_classes: int, config: TrainerConfig | None = None):
        self.config = config or TrainerConfig()
        self.input_dim, self.n_classes = int(input_dim), int(n_classes)
        self.rng = np.random.default_rng(self.config.seed)
        if self.config.disable_agmm_ns:
            src, tgt = RunningGaussian(input_dim), RunningGaussian(input_dim)
        else:
            w = self.config.exemption_window
            src, tgt = Agmm(input_dim, w), Agmm(input_dim, w)
        net = ElasticNetwork(input_dim, n_classes, hidden=1, rng=self.rng)
        self.state = AtlState(net, src, tgt)

    @property
    def net(self) -> ElasticNetwork:
        return self.state.net

    # -- structure ------------------------------------------------------

    def _grow(self, count):
        st = self.state
        st.net.grow(count, self.rng)
        for k, axis in HIDDEN_AXIS.items():
            if axis is not None:
                pad = [(0, 0)] * st.velocity[k].ndim
                pad[axis] = (0, count)
                st.velocity[k] = np.pad(st.velocity[k], pad)
        st.grow_events += 1

    def _prune(self, victims):
        st = self.state
        if not victims:
            return
        st.net.prune(victims)
        idx = sorted(victims)
        for k, axis in HIDDEN_AXIS.items():
            if axis is not None:
                st.velocity[k] = np.delete(st.velocity[k], idx, axis=axis)
        st.prune_events += 1

    def _structural_step(self, x, target, density, ns: NsTracker, decoder: bool):
        net = self.state.net
        if not density.n_components:
            return
        ey, ey2 = head_moments(net, density, density.mixing_coefficients(x), decoder)
        bias_sq = compute_bias_sq(ey, target)
        var = max(float(np.mean(ey2 - ey * ey)), 0.0)
        grow = ns.update_and_check_grow(bias_sq)
        prune = ns.update_and_check_prune(var)
        if grow:
            self._grow(1 if self.config.disable_agmm_ns else density.n_components)
        elif prune and net.hidden_count > 1:
            self._prune(select_prune_victims(hidden_contributions(net, density)))

    def _step(self, grads):
        cfg, st = self.config, self.state
        if not sgd_step(st.net.params, grads, st.velocity, cfg.learning_rate, cfg.momentum):
            st.skipped_steps += 1
            log.warning("non-finite gradient, step skipped (%d so far)", st.skipped_steps)

    # -- phases ---------------------------------------------------------

    def discriminative_phase(self, X, y, structural: bool = True):
        X = np.asarray(X, dtype=float)
        if not len(X):
            return
        Y = np.eye(self.n_classes)[np.asarray(y, dtype=int)]
        st = self.state
        for x, t in zip(X, Y):
            _, g = cross_entropy_grad(st.net.params, x, t)
            self._step(g)
            if structural:
                self._structural_step(x, t, st.agmm_source, st.ns_disc, decoder=False)

    def generative_phase(self, X, structural: bool = True):
        X = np.asarray(X, dtype=float)
        if not len(X):
            return
        st, nf = self.state, self.config.noise_fraction
        for x in X:
            _, g = reconstruction_grad(st.net.params, corrupt(x, nf, self.rng), x)
            self._step(g)
            if structural:
                self._structural_step(x, x, st.agmm_target, st.ns_gen, decoder=True)

    def kl_phase(self, X_s, X_t) -> float | None:
        if self.config.disable_kl or not len(X_s) or not len(X_t):
            return None
        loss, g = kl_grad(self.state.net.params, np.asarray(X_s, float), np.asarray(X_t, float))
        self._step(g)
        return loss

    def observe_densities(self, X_s, X_t):
        st = self.state
        for x in X_s:
            st.agmm_source.observe(x, st.ns_disc.chi)
        for x in X_t:
            st.agmm_target.observe(x, st.ns_gen.chi)

    def process_chunk(self, X_s, y_s, X_t, warmup: bool = False):
        """Test on both batches, then learn from them.

        Returns ``(target_predictions, source_predictions, ChunkMetrics)``; the
        predictions come from the network as it stood before this chunk.
        """
        X_s = np.asarray(X_s, dtype=float)
        X_t = np.asarray(X_t, dtype=float)
        y_s = np.asarray(y_s, dtype=int)
        for name, X in (("source", X_s), ("target", X_t)):
            if X.ndim != 2 or X.shape[1] != self.input_dim:
                raise ConfigurationError(
                    f"{name} chunk has shape {X.shape}, expected (n, {self.input_dim})"
                )
        if len(y_s) != len(X_s):
            raise ConfigurationError("source labels and features differ in length")

        st = self.state
        pred_t = st.net.predict(X_t) if len(X_t) else np.zeros(0, dtype=int)
        pred_s = st.net.predict(X_s) if len(X_s) else np.zeros(0, dtype=int)
        src_acc = float(np.mean(pred_s == y_s)) if len(y_s) else float("nan")

        t0 = time.perf_counter()
        structural = warmup or not self.config.disable_structural
        self.observe_densities(X_s, X_t)
        for _ in range(self.config.epochs_per_batch):
            self.generative_phase(X_t, structural)
            self.discriminative_phase(X_s, y_s, structural)
            self.kl_phase(X_s, X_t)
        elapsed = time.perf_counter() - t0

        metrics = ChunkMetrics(
            st.chunk_counter,
            src_acc,
            st.net.hidden_count,
            st.agmm_source.n_components,
            st.agmm_target.n_components,
            elapsed,
        )
        st.chunk_counter += 1
        return pred_t, pred_s, metrics
