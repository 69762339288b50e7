"""Dense float64 primitives shared by every trainable model.

Vectors and matrices are plain ``numpy`` arrays of dtype float64. Parameter
sets are ``dict[str, np.ndarray]`` so the optimizer, the gradient checker and
the checkpoint writer can treat all models uniformly.
"""
from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

PROB_FLOOR = 1e-12
ADAGRAD_EPS = 1e-8
DEFAULT_LR = 0.05
INIT_SCALE = 0.1


class DimensionError(ValueError):
    """Raised when operand shapes do not line up."""


def as_vec(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    return v


def matvec(m, v) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if m.ndim != 2 or v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise DimensionError(
            f"matvec: matrix is {m.shape}, expected (*, {v.shape[0] if v.ndim == 1 else '?'}); "
            f"vector has shape {v.shape}"
        )
    return m @ v


def _floating(x) -> np.ndarray:
    # keeps extended precision intact for the gradient oracle
    x = np.asarray(x)
    return x if x.dtype.kind == "f" else x.astype(np.float64)


def relu(v) -> np.ndarray:
    return np.maximum(_floating(v), 0.0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    x = _floating(x)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(v) -> np.ndarray:
    v = _floating(v)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError("softmax needs a nonempty vector")
    e = np.exp(v - v.max())
    return e / e.sum()


def log_softmax(v) -> np.ndarray:
    v = _floating(v)
    shifted = v - v.max()
    return shifted - np.log(np.exp(shifted).sum())


def cross_entropy(pred, target_index: int) -> float:
    """Negative log-likelihood of ``target_index`` under probability vector ``pred``."""
    pred = np.asarray(pred, dtype=np.float64)
    if not 0 <= target_index < pred.shape[0]:
        raise IndexError(f"target index {target_index} out of range for {pred.shape[0]} classes")
    return float(-np.log(max(pred[target_index], PROB_FLOOR)))


def uniform_init(rng: np.random.Generator, shape, scale: float = INIT_SCALE) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape)


class AdaGrad:
    """Per-scalar adaptive learning rates.

    ``accumulators`` hold the running sum of squared gradients for every
    parameter entry. :meth:`step` updates the parameter arrays in place.
    """

    def __init__(self, params: Mapping[str, np.ndarray], lr: float = DEFAULT_LR,
                 eps: float = ADAGRAD_EPS):
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        self.lr = lr
        self.eps = eps
        self.accumulators = {k: np.zeros_like(p) for k, p in params.items()}

    def step(self, params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray]) -> None:
        for name, g in grads.items():
            if name not in params:
                raise KeyError(f"gradient for unknown parameter {name!r}")
            p = params[name]
            acc = self.accumulators[name]
            if g.shape != p.shape or acc.shape != p.shape:
                raise DimensionError(
                    f"adagrad: parameter {name!r} has shape {p.shape}, gradient {g.shape}"
                )
            acc += g * g
            p -= self.lr * g / (np.sqrt(acc) + self.eps)


def adagrad_step(params, grads, state: AdaGrad):
    """Functional spelling of :meth:`AdaGrad.step`; returns ``(params, state)``."""
    state.step(params, grads)
    return params, state


def finite_diff_gradient(loss_fn: Callable[[], float], params, h: float = 1e-5):
    """Central-difference gradient of ``loss_fn`` with respect to ``params``.

    ``params`` is an array or a dict of arrays that ``loss_fn`` reads; every
    entry is perturbed in place and restored afterwards.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    if isinstance(params, np.ndarray):
        return _fd_array(loss_fn, params, h)
    return {k: _fd_array(loss_fn, p, h) for k, p in params.items()}


def _fd_array(loss_fn, p: np.ndarray, h: float) -> np.ndarray:
    grad = np.zeros_like(p)
    flat = p.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        plus = loss_fn()
        flat[i] = orig - h
        minus = loss_fn()
        flat[i] = orig
        gflat[i] = (plus - minus) / (2 * h)
    return grad


def relative_error(a, b, floor: float = 1e-8) -> np.ndarray:
    """Elementwise ``|a-b| / max(|a|, |b|, floor)``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def max_relative_error(analytic: Mapping[str, np.ndarray], numeric: Mapping[str, np.ndarray]) -> float:
    worst = 0.0
    for k, a in analytic.items():
        if a.size:
            worst = max(worst, float(relative_error(a, numeric[k]).max()))
    return worst
