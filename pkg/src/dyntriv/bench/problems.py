"""Built-in benchmark objectives with known optima.

Seeding: the run seed feeds a ``numpy.random.SeedSequence`` which spawns
two children, the first for problem data and the second for the starting
point, so each stream is reproducible on its own.

``n`` is the ambient vector length for the sphere and the hyperboloid
(``rayleigh`` with n=50 lives on S^49) and the matrix size elsewhere.
"""

from dataclasses import dataclass

import numpy as np

from .. import manifolds as mf
from ..densela import qr_thin, sym_eig
from ..engine import Objective
from ..errors import ConfigError

PROBLEMS = ("procrustes", "rayleigh", "brockett", "spd_recovery", "hyperbolic_centroid")

DEFAULT_SIZES = {
    "procrustes": (16, 0), "rayleigh": (50, 0), "brockett": (20, 4),
    "spd_recovery": (10, 0), "hyperbolic_centroid": (5, 0),
}


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    n: int = 0
    k: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.name not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.name!r}; choose from {', '.join(PROBLEMS)}")
        n, k = DEFAULT_SIZES[self.name]
        if not self.n:
            object.__setattr__(self, "n", n)
        if not self.k:
            object.__setattr__(self, "k", k)
        if self.n < 2:
            raise ConfigError("problem size n must be at least 2")
        if self.name == "brockett" and not 1 <= self.k <= self.n:
            raise ConfigError("brockett needs 1 <= k <= n")

    @property
    def manifold(self):
        n = self.n
        if self.name == "procrustes":
            return mf.SpecialOrthogonal(n)
        if self.name == "rayleigh":
            return mf.Sphere(n - 1)
        if self.name == "brockett":
            return mf.Stiefel(n, self.k)
        if self.name == "spd_recovery":
            return mf.SymPosDef(n)
        return mf.Hyperbolic(n - 1)

    def streams(self):
        data, init = np.random.SeedSequence(self.seed).spawn(2)
        return np.random.default_rng(data), np.random.default_rng(init)


@dataclass(frozen=True, eq=False)
class Problem:
    spec: ProblemSpec
    manifold: mf.ManifoldSpec
    objective: Objective
    start: mf.Point
    optimum: float = None
    data: dict = None


def _orthogonal(rng, n):
    return qr_thin(rng.standard_normal((n, n))).q


def _spectral(rng, values):
    q = _orthogonal(rng, len(values))
    return (q * values) @ q.T


def _procrustes(spec, rng, init):
    n = spec.n
    # well-conditioned data: singular values in [1, 2]
    a = (_orthogonal(rng, n) * rng.uniform(1.0, 2.0, n)) @ _orthogonal(rng, n).T
    target = mf.random_point(spec.manifold, rng).value
    b = target @ a

    def f(p):
        r = p.value @ a - b
        return 0.5 * float(np.sum(r * r))

    def grad(p):
        return (p.value @ a - b) @ a.T

    start = mf.random_point(spec.manifold, init)
    return Objective(f, grad), start, 0.0, {"a": a, "b": b, "q_star": target}


def rayleigh_objective(c):
    """``x^T C x`` on the unit sphere, with its optimum ``lambda_min(C)``."""
    def f(p):
        x = p.value[:, 0]
        return float(x @ c @ x)

    def grad(p):
        return 2.0 * c @ p.value

    return Objective(f, grad), float(sym_eig(c).values[0])


def brockett_objective(c, k):
    """``tr(X^T C X N)`` on St(n, k) with ``N = diag(k, ..., 1)`` and its optimum."""
    weights = np.arange(k, 0, -1, dtype=np.float64)

    def f(p):
        x = p.value
        return float(np.sum((x.T @ c @ x).diagonal() * weights))

    def grad(p):
        return 2.0 * (c @ p.value) * weights

    # smallest eigenvalues pair with the largest weights
    lam = sym_eig(c).values
    return Objective(f, grad), float(np.sum(lam[:k] * weights))


def _rayleigh(spec, rng, init):
    n = spec.n
    # eigenvalue -1 separated from the rest, which lie in [0, 1]
    vals = np.concatenate([[-1.0], rng.uniform(0.0, 1.0, n - 1)])
    c = _spectral(rng, vals)
    c = 0.5 * (c + c.T)
    obj, opt = rayleigh_objective(c)
    return obj, mf.random_point(spec.manifold, init), opt, {"c": c}


def _brockett(spec, rng, init):
    n = spec.n
    vals = np.arange(1, n + 1) / n + rng.uniform(0.0, 0.25 / n, n)
    c = _spectral(rng, vals)
    c = 0.5 * (c + c.T)
    obj, opt = brockett_objective(c, spec.k)
    return obj, mf.random_point(spec.manifold, init), opt, {"c": c}


def _spd_recovery(spec, rng, init):
    n = spec.n
    g = rng.standard_normal((n, n))
    target = g @ g.T / n + np.eye(n)

    def f(p):
        r = p.value - target
        return 0.5 * float(np.sum(r * r))

    def grad(p):
        return p.value - target

    return Objective(f, grad), mf.make_point(spec.manifold, np.eye(n)), 0.0, {"target": target}


def _acosh_ratio(d):
    # d / sinh(d), stable near 0
    if d < 1e-4:
        return 1.0 - d * d / 6.0
    return d / np.sinh(d)


def _hyperbolic_centroid(spec, rng, init):
    m = spec.manifold
    center = mf.random_point(m, rng)
    pts = []
    for _ in range(8):
        c = rng.standard_normal(m.dim) * 0.5
        v = center.frame @ c.reshape(-1, 1)
        r = float(np.sqrt(c @ c))
        pts.append(np.cosh(r) * center.value + np.sinh(r) / r * v)
    z = np.hstack(pts)
    jz = z.copy()
    jz[-1] *= -1.0

    def dists(x):
        u = np.maximum(-(x[:, 0] @ jz), 1.0)
        return np.arccosh(u)

    def f(p):
        return float(np.sum(dists(p.value) ** 2)) / z.shape[1]

    def grad(p):
        # d/dx arccosh(u)^2 with u = -<x, z>_H is 2 d / sinh(d) * (-J z)
        coef = np.array([2.0 * _acosh_ratio(di) for di in dists(p.value)])
        return (-(jz * coef).sum(axis=1) / z.shape[1]).reshape(-1, 1)

    return Objective(f, grad), mf.random_point(m, init), None, {"z": z}


_BUILDERS = {
    "procrustes": _procrustes, "rayleigh": _rayleigh, "brockett": _brockett,
    "spd_recovery": _spd_recovery, "hyperbolic_centroid": _hyperbolic_centroid,
}


def build_problem(spec, manifold=None):
    """Objective, starting point and (when known) optimal value for ``spec``."""
    if manifold is not None and manifold != spec.manifold:
        raise ConfigError(f"{spec.name} is posed on {spec.manifold}, not {manifold}")
    rng, init = spec.streams()
    obj, start, opt, data = _BUILDERS[spec.name](spec, rng, init)
    return Problem(spec, spec.manifold, obj, start, opt, data)


def gradcheck(obj, x, h=1e-6):
    """Max-norm relative mismatch between ``euclidean_grad`` and central differences."""
    if not 1e-8 <= h <= 1e-3:
        raise ValueError("step h must lie in [1e-8, 1e-3]")
    base = x.value
    g = np.asarray(obj.euclidean_grad(x), dtype=np.float64).reshape(base.shape)
    fd = np.empty_like(base)
    for idx in np.ndindex(base.shape):
        plus, minus = base.copy(), base.copy()
        plus[idx] += h
        minus[idx] -= h
        fp = obj.eval(mf.Point(x.manifold, plus))
        fm = obj.eval(mf.Point(x.manifold, minus))
        fd[idx] = (fp - fm) / (2.0 * h)
    scale = max(float(np.max(np.abs(g))), float(np.max(np.abs(fd))), 1e-300)
    return float(np.max(np.abs(g - fd))) / scale
