"""First-order Euclidean optimizers on flat coordinate arrays.

States are immutable; ``step`` returns a new state and new iterate.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, ShapeError

OPTIMIZERS = ("sgd", "momentum", "adagrad", "rmsprop", "adam")


@dataclass(frozen=True)
class Hyper:
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    alpha: float = 0.99
    eps: float = 1e-8


@dataclass(frozen=True, eq=False)
class OptimizerState:
    kind: str
    lr: float
    step_count: int = 0
    m1: np.ndarray = field(default_factory=lambda: np.zeros(0))
    m2: np.ndarray = field(default_factory=lambda: np.zeros(0))
    hyper: Hyper = Hyper()

    def __post_init__(self):
        if self.kind not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.kind!r}")
        if not self.lr > 0:
            raise ConfigError("learning rate must be positive")
        if not self.hyper.eps > 0:
            raise ConfigError("epsilon must be positive")


def make_optimizer(kind, lr, **hyper):
    return OptimizerState(kind=kind, lr=float(lr), hyper=Hyper(**hyper))


def _buffer(buf, n):
    return buf if buf.size == n else np.zeros(n)


def step(s, y, g):
    """One update. Returns ``(new_state, new_y)``; the inputs are not modified."""
    y = np.asarray(y, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if y.shape != g.shape or y.ndim != 1:
        raise ShapeError("iterate and gradient must be flat arrays of equal length")
    for buf in (s.m1, s.m2):
        if buf.size not in (0, y.size):
            raise ShapeError("optimizer buffers do not match the iterate length")
    if not np.all(np.isfinite(g)):
        raise FloatingPointError("non-finite gradient entries")
    h, lr, t = s.hyper, s.lr, s.step_count + 1
    m1, m2 = s.m1, s.m2
    if s.kind == "sgd":
        y = y - lr * g
    elif s.kind == "momentum":
        m1 = h.momentum * _buffer(m1, y.size) + g
        y = y - lr * m1
    elif s.kind == "adagrad":
        m2 = _buffer(m2, y.size) + g * g
        y = y - lr * g / np.sqrt(m2 + h.eps)
    elif s.kind == "rmsprop":
        m2 = h.alpha * _buffer(m2, y.size) + (1.0 - h.alpha) * g * g
        y = y - lr * g / np.sqrt(m2 + h.eps)
    else:
        m1 = h.beta1 * _buffer(m1, y.size) + (1.0 - h.beta1) * g
        m2 = h.beta2 * _buffer(m2, y.size) + (1.0 - h.beta2) * g * g
        mhat = m1 / (1.0 - h.beta1 ** t)
        vhat = m2 / (1.0 - h.beta2 ** t)
        y = y - lr * mhat / (np.sqrt(vhat) + h.eps)
    return replace(s, step_count=t, m1=m1, m2=m2), y


def reset(s):
    """Zero the moment buffers and the step counter; keep hyperparameters."""
    return replace(s, step_count=0, m1=np.zeros(0), m2=np.zeros(0))
