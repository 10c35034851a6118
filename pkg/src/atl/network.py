"""Single-hidden-layer network shared by a softmax classifier and a denoising
autoencoder, with online width changes.

The encoder (``w_in``, ``b``) is common to both heads.  ``w_out``/``c`` form the
softmax head and ``w_dec``/``d`` the untied sigmoid decoder.
"""

from __future__ import annotations

import numpy as np

# axis along which each parameter is indexed by hidden unit (None: no hidden axis)
HIDDEN_AXIS = {"w_in": 1, "b": 0, "w_out": 0, "c": None, "w_dec": 0, "d": None}


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def softmax(z):
    z = np.asarray(z, dtype=float)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def xavier(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))  # variance 2 / (fan_in + fan_out)
    return rng.uniform(-limit, limit, size=shape)


class ElasticNetwork:
    def __init__(self, input_dim: int, n_classes: int, hidden: int = 1, rng=None):
        if hidden < 1:
            raise ValueError("hidden must be >= 1")
        self.input_dim = u = int(input_dim)
        self.n_classes = m = int(n_classes)
        rng = np.random.default_rng(rng)
        R = int(hidden)
        self.params = {
            "w_in": xavier(rng, (u, R), u, R),
            "b": xavier(rng, (R,), u, R),
            "w_out": xavier(rng, (R, m), R, m),
            "c": np.zeros(m),
            "w_dec": xavier(rng, (R, u), R, u),
            "d": np.zeros(u),
        }

    def __getattr__(self, name):
        params = self.__dict__.get("params")
        if params is not None and name in params:
            return params[name]
        raise AttributeError(name)

    @property
    def hidden_count(self) -> int:
        return self.params["b"].shape[0]

    def hidden(self, x):
        return sigmoid(np.asarray(x) @ self.w_in + self.b)

    def forward_classify(self, x):
        h = self.hidden(x)
        return h, softmax(h @ self.w_out + self.c)

    def forward_reconstruct(self, x_tilde):
        h = self.hidden(x_tilde)
        return h, sigmoid(h @ self.w_dec + self.d)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.argmax(self.hidden(X) @ self.w_out + self.c, axis=1)

    def grow(self, count: int, rng) -> "ElasticNetwork":
        """Append ``count`` Xavier-initialised hidden units; old units are untouched."""
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(rng)
        u, m = self.input_dim, self.n_classes
        R = self.hidden_count + count
        p = self.params
        p["w_in"] = np.hstack([p["w_in"], xavier(rng, (u, count), u, R)])
        p["b"] = np.concatenate([p["b"], xavier(rng, (count,), u, R)])
        p["w_out"] = np.vstack([p["w_out"], xavier(rng, (count, m), R, m)])
        p["w_dec"] = np.vstack([p["w_dec"], xavier(rng, (count, u), R, u)])
        return self

    def prune(self, indices) -> "ElasticNetwork":
        idx = sorted({int(i) for i in indices})
        if not idx:
            return self
        R = self.hidden_count
        if any(i < 0 or i >= R for i in idx):
            raise IndexError(f"hidden unit index out of range [0, {R})")
        if len(idx) >= R:
            raise ValueError("cannot remove every hidden unit")
        for name, axis in HIDDEN_AXIS.items():
            if axis is not None:
                self.params[name] = np.delete(self.params[name], idx, axis=axis)
        return self

    def copy(self) -> "ElasticNetwork":
        new = object.__new__(ElasticNetwork)
        new.input_dim, new.n_classes = self.input_dim, self.n_classes
        new.params = {k: v.copy() for k, v in self.params.items()}
        return new


def corrupt(x, noise_fraction: float, rng) -> np.ndarray:
    """Masking noise: zero ``round(noise_fraction * u)`` distinct coordinates."""
    x = np.array(x, dtype=float)
    k = int(np.floor(noise_fraction * x.shape[-1] + 0.5))
    if k:
        x[rng.choice(x.shape[-1], size=k, replace=False)] = 0.0
    return x


# -- expectations under a Gaussian mixture (probit approximation) -----------


def shifted_centers(density) -> np.ndarray:
    return density.centers / np.sqrt(1.0 + np.pi * density.widths**2 / 8.0)


def component_hidden(net: ElasticNetwork, density) -> np.ndarray:
    """Expected hidden activation under each mixture component, shape (M, R)."""
    return sigmoid(shifted_centers(density) @ net.w_in + net.b)


def expected_hidden(net, density, weights) -> np.ndarray:
    return np.asarray(weights) @ component_hidden(net, density)


def expected_output(net, density, weights) -> np.ndarray:
    """Pre-softmax expected output: linear map of the expected hidden layer."""
    return expected_hidden(net, density, weights) @ net.w_out + net.c


def expected_reconstruction(net, density, weights) -> np.ndarray:
    return sigmoid(expected_hidden(net, density, weights) @ net.w_dec + net.d)


def hidden_contributions(net, density) -> np.ndarray:
    """Per-unit contribution: activation expectation summed over components (unweighted)."""
    return component_hidden(net, density).sum(axis=0)
