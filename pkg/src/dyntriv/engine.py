"""Dynamic trivialization loop.

Every step pulls the objective back through ``phi_basis``, lets a Euclidean
optimizer move the chart coordinates, and every ``K`` steps moves the basis
to the current point and restarts the coordinates at zero. ``K = 1`` with
SGD is Riemannian gradient descent with phi as retraction; ``K = inf``
never rebases and is the static trivialization at the starting point.
"""

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import manifolds as mf
from . import optim
from . import triv as tv
from .errors import NumericalAbort, StructureError
from .matexp import lie_injectivity_check

INF = math.inf


@dataclass(frozen=True)
class Objective:
    """``eval(point) -> float`` and ``euclidean_grad(point) -> ndarray``."""

    eval: Callable
    euclidean_grad: Callable


@dataclass(frozen=True)
class TraceRecord:
    step: int
    loss: float
    grad_norm: float
    membership: float
    rebase: bool
    wall_ms: float = 0.0
    loss_after_rebase: float = None


@dataclass(frozen=True)
class EngineConfig:
    carry_moments: bool = False
    record_time: bool = False
    trace_every: int = 1
    diagnose_injectivity: bool = False
    grad_method: str = "closed"


@dataclass(frozen=True, eq=False)
class TrivEngineState:
    basis: mf.Point
    y: np.ndarray
    rebase_period: float
    optimizer: optim.OptimizerState
    trivialization: tv.Trivialization
    k_since_rebase: int = 0
    step: int = 0
    history: tuple = ()
    injectivity_violations: tuple = ()
    config: EngineConfig = field(default_factory=EngineConfig)

    @property
    def point(self):
        return tv.value(self.trivialization, self.basis, self.y)


def init_state(trivialization, start, rebase_period, optimizer, config=None):
    """Fresh engine state at ``start`` with zero coordinates."""
    if isinstance(start, np.ndarray):
        start = mf.make_point(trivialization.manifold, start)
    k = rebase_period
    if not (k == INF or (int(k) == k and k >= 1)):
        raise ValueError("rebase period must be a positive integer or inf")
    return TrivEngineState(
        basis=start,
        y=np.zeros(trivialization.manifold.dim),
        rebase_period=INF if k == INF else int(k),
        optimizer=optimizer,
        trivialization=trivialization,
        config=config or EngineConfig(),
    )


def _evaluate(s, obj):
    x = tv.value(s.trivialization, s.basis, s.y)
    loss = float(obj.eval(x))
    grad = np.asarray(obj.euclidean_grad(x), dtype=np.float64)
    if grad.ndim == 1:
        grad = grad.reshape(-1, 1)
    return x, loss, grad


def engine_step(s, obj):
    """One optimizer step on the current chart, followed by a rebase every K steps."""
    t0 = time.perf_counter()
    m = s.trivialization.manifold
    x, loss, amb = _evaluate(s, obj)
    if not math.isfinite(loss) or not np.all(np.isfinite(amb)):
        raise NumericalAbort(f"non-finite loss or gradient at step {s.step}", s.history)
    g = tv.pullback_grad(s.trivialization, s.basis, s.y, amb, s.config.grad_method).coords_grad
    try:
        opt, y = optim.step(s.optimizer, s.y, g)
    except FloatingPointError as exc:
        raise NumericalAbort(str(exc), s.history) from exc
    if not np.all(np.isfinite(y)):
        raise NumericalAbort(f"non-finite iterate at step {s.step}", s.history)

    violations = s.injectivity_violations
    if s.config.diagnose_injectivity and s.trivialization.kind == "lie_exp":
        try:
            if not lie_injectivity_check(mf.coords_to_algebra(s.basis, y)):
                violations = violations + (s.step,)
        except StructureError:
            pass

    k = s.k_since_rebase + 1
    basis = s.basis
    rebased = k == s.rebase_period
    loss_after = None
    if rebased:
        basis = tv.value(s.trivialization, s.basis, y)
        y = np.zeros(m.dim)
        k = 0
        if not s.config.carry_moments:
            opt = optim.reset(opt)
        # same manifold point as before the rebase, logged for trace continuity
        loss_after = float(obj.eval(basis))
    wall = (time.perf_counter() - t0) * 1e3 if s.config.record_time else 0.0
    history = s.history
    if s.step % s.config.trace_every == 0 or rebased:
        rec = TraceRecord(
            step=s.step, loss=loss, grad_norm=float(np.sqrt(g @ g)),
            membership=mf.membership(m, x.value), rebase=rebased, wall_ms=wall,
            loss_after_rebase=loss_after,
        )
        history = history + (rec,)
    return replace(s, basis=basis, y=y, k_since_rebase=k, step=s.step + 1,
                   optimizer=opt, history=history, injectivity_violations=violations)


def final_record(s, obj):
    """Trace record at the current point, with no step taken."""
    x, loss, amb = _evaluate(s, obj)
    g = tv.pullback_grad(s.trivialization, s.basis, s.y, amb, s.config.grad_method).coords_grad
    return TraceRecord(step=s.step, loss=loss, grad_norm=float(np.sqrt(g @ g)),
                       membership=mf.membership(s.trivialization.manifold, x.value),
                       rebase=False)


def run(s, obj, max_steps, grad_tol=None, loss_tol=None):
    """Iterate until ``max_steps``, ``|g| <= grad_tol`` or ``loss <= loss_tol``.

    A tolerance of ``None`` disables that stopping test.

    Returns the final state and the full trace, which ends with a record of
    the final point.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    for _ in range(max_steps):
        s = engine_step(s, obj)
        last = s.history[-1] if s.history else None
        if last is not None and last.step == s.step - 1:
            if grad_tol is not None and last.grad_norm <= grad_tol:
                break
            if loss_tol is not None and last.loss <= loss_tol:
                break
    tail = final_record(s, obj)
    if not math.isfinite(tail.loss):
        raise NumericalAbort("non-finite loss at the final point", s.history)
    return s, s.history + (tail,)
