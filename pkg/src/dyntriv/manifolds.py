"""Catalog of matrix manifolds: membership, tangent charts and sampling.

Every tangent space is parametrized by a flat vector of ``dim`` free
coordinates. The chart factors through an intermediate "algebra" matrix:

========== ======================== ===================================
kind        algebra element          ambient tangent
========== ======================== ===================================
so, torus   skew A (n x n)           B A
sl          traceless A              B A
glp         A (n x n)                B A
stiefel     Z = [A; A_perp] (n x k)  B A + B_perp A_perp
sphere      c (n x 1)                U c, U orthonormal basis of x^perp
hyperbolic  c (n x 1)                U c, U H-orthonormal basis of x^perp_H
spd         symmetric A              B^{1/2} A B^{1/2}
========== ======================== ===================================

Trivializations differentiate with respect to the algebra element, and
:func:`algebra_grad_to_coords` (the adjoint of coords -> algebra) finishes
the pullback.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .densela import cholesky, det, fro_norm, lu_solve, qr_complete, qr_thin, sym_eig
from .errors import ShapeError, SingularMatrixError, StructureError, TangencyError

KINDS = ("so", "torus", "stiefel", "sphere", "hyperbolic", "spd", "sl", "glp")
GROUP_KINDS = ("so", "torus", "sl", "glp")

MEMBERSHIP_TOL = 1e-8
TANGENCY_TOL = 1e-8


@dataclass(frozen=True)
class ManifoldSpec:
    """A manifold from the catalog.

    ``n`` is the size parameter; ``k`` is only used by Stiefel. For the torus
    ``n`` counts 2x2 rotation blocks, so points are ``2n x 2n``. Sphere and
    hyperbolic space of dimension ``n`` live in R^{n+1} (stored as columns).
    """

    kind: str
    n: int
    k: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown manifold kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("manifold size must be positive")
        if self.kind == "stiefel" and not 1 <= self.k <= self.n:
            raise ValueError("Stiefel requires 1 <= k <= n")

    @property
    def ambient_shape(self):
        n, k = self.n, self.k
        return {
            "so": (n, n), "torus": (2 * n, 2 * n), "stiefel": (n, k),
            "sphere": (n + 1, 1), "hyperbolic": (n + 1, 1), "spd": (n, n),
            "sl": (n, n), "glp": (n, n),
        }[self.kind]

    @property
    def ambient_rows(self):
        return self.ambient_shape[0]

    @property
    def ambient_cols(self):
        return self.ambient_shape[1]

    @property
    def dim(self):
        n, k = self.n, self.k
        return {
            "so": n * (n - 1) // 2, "torus": n, "stiefel": n * k - k * (k + 1) // 2,
            "sphere": n, "hyperbolic": n, "spd": n * (n + 1) // 2,
            "sl": n * n - 1, "glp": n * n,
        }[self.kind]

    def __str__(self):
        if self.kind == "stiefel":
            return f"stiefel({self.n},{self.k})"
        return f"{self.kind}({self.n})"


def SpecialOrthogonal(n):
    return ManifoldSpec("so", n)


def RealTorus(n):
    """Torus of ``n`` planar rotations, embedded as 2n x 2n block-diagonal matrices."""
    return ManifoldSpec("torus", n)


def Stiefel(n, k):
    return ManifoldSpec("stiefel", n, k)


def Sphere(n):
    return ManifoldSpec("sphere", n)


def Hyperbolic(n):
    return ManifoldSpec("hyperbolic", n)


def SymPosDef(n):
    return ManifoldSpec("spd", n)


def SpecialLinear(n):
    return ManifoldSpec("sl", n)


def GeneralLinearPlus(n):
    return ManifoldSpec("glp", n)


def minkowski(x, y):
    """Lorentzian product sum_{i<=n} x_i y_i - x_{n+1} y_{n+1} of two columns."""
    return float(x[:-1, 0] @ y[:-1, 0] - x[-1, 0] * y[-1, 0])


@dataclass(frozen=True, eq=False)
class Point:
    """A point on a manifold.

    Chart factors are computed on first use and cached: ``frame`` is the
    Stiefel completion B_perp, or the tangent basis U for the sphere and
    hyperbolic space; ``sqrt``, ``isqrt``, ``eig`` and ``chol`` are SPD
    factors of the base.
    """

    manifold: ManifoldSpec
    value: np.ndarray

    @cached_property
    def frame(self):
        kind = self.manifold.kind
        if kind == "stiefel":
            return qr_complete(self.value)[:, self.manifold.k:]
        if kind == "sphere":
            return qr_complete(self.value)[:, 1:]
        if kind == "hyperbolic":
            return _hyperbolic_frame(self.value)
        raise AttributeError(f"{self.manifold} points carry no frame")

    @cached_property
    def eig(self):
        """``(s, U)`` with ``value = U diag(s**2) U^T``."""
        eg = sym_eig(self.value)
        if eg.values[0] <= 1e-12:
            raise StructureError("SPD point has a non-positive eigenvalue")
        return np.sqrt(eg.values), eg.vectors

    @cached_property
    def sqrt(self):
        s, u = self.eig
        return (u * s) @ u.T

    @cached_property
    def isqrt(self):
        s, u = self.eig
        return (u / s) @ u.T

    @cached_property
    def chol(self):
        return cholesky(self.value)


def make_point(m, value):
    """Wrap an ambient matrix as a Point (SPD input is symmetrized)."""
    value = np.array(value, dtype=np.float64)
    if value.ndim == 1:
        value = value.reshape(-1, 1)
    if value.shape != m.ambient_shape:
        raise ShapeError(f"{m} expects shape {m.ambient_shape}, got {value.shape}")
    if not np.all(np.isfinite(value)):
        raise ValueError("point has non-finite entries")
    if m.kind == "spd":
        value = 0.5 * (value + value.T)
    return Point(manifold=m, value=value)


def _hyperbolic_frame(x):
    # H-project e_1..e_n away from x (e_{n+1} is the dependent one, |x_{n+1}| > |x_i|)
    # then Gram-Schmidt in the Lorentzian product; the span is spacelike so it is definite.
    dim = x.shape[0] - 1
    basis = []
    for i in range(dim):
        v = np.zeros_like(x)
        v[i, 0] = 1.0
        v = v + minkowski(v, x) * x
        for u in basis:
            v = v - minkowski(u, v) * u
        v = v / np.sqrt(minkowski(v, v))
        basis.append(v)
    return np.hstack(basis)


@dataclass(frozen=True, eq=False)
class TangentCoords:
    manifold: ManifoldSpec
    base: Point
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64).reshape(-1)
        if c.size != self.manifold.dim:
            raise ShapeError(f"{self.manifold} has dim {self.manifold.dim}, got {c.size} coords")
        object.__setattr__(self, "coords", c)


# ------------------------------------------------------------ membership

def membership(m, x):
    """Scalar violation of the manifold's defining relations (0 on the manifold)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.shape != m.ambient_shape:
        raise ShapeError(f"{m} expects shape {m.ambient_shape}, got {x.shape}")
    kind = m.kind
    if kind == "so":
        return fro_norm(x.T @ x - np.eye(m.n)) + max(0.0, -det(x))
    if kind == "torus":
        mask = np.kron(np.eye(m.n), np.ones((2, 2))).astype(bool)
        off_block = fro_norm(np.where(mask, 0.0, x))
        form = np.sum(np.abs(x[0::2, 0::2].diagonal() - x[1::2, 1::2].diagonal()))
        form += np.sum(np.abs(x[0::2, 1::2].diagonal() + x[1::2, 0::2].diagonal()))
        return off_block + form + fro_norm(x.T @ x - np.eye(2 * m.n))
    if kind == "stiefel":
        return fro_norm(x.T @ x - np.eye(m.k))
    if kind == "sphere":
        return abs(float(np.sqrt(np.sum(x * x))) - 1.0)
    if kind == "hyperbolic":
        return abs(minkowski(x, x) + 1.0) + max(0.0, -float(x[-1, 0]))
    if kind == "spd":
        sym = 0.5 * (x + x.T)
        try:
            # a successful factorization already certifies lambda_min > 0
            cholesky(sym)
            neg = 0.0
        except SingularMatrixError:
            neg = max(0.0, -float(sym_eig(sym).values[0]))
        return fro_norm(x - x.T) + neg
    if kind == "sl":
        return abs(det(x) - 1.0)
    # glp: positive determinant; zero determinant counts as a violation
    d = det(x)
    return 0.0 if d > 0 else 1.0 - d


# ------------------------------------------------------------ charts

def _lower_idx(n):
    return np.tril_indices(n, -1)


def coords_to_algebra(point, coords):
    m = point.manifold
    c = np.asarray(coords, dtype=np.float64).reshape(-1)
    if c.size != m.dim:
        raise ShapeError(f"{m} has dim {m.dim}, got {c.size} coords")
    kind = m.kind
    if kind == "so":
        a = np.zeros((m.n, m.n))
        a[_lower_idx(m.n)] = c
        return a - a.T
    if kind == "torus":
        a = np.zeros((2 * m.n, 2 * m.n))
        idx = np.arange(m.n)
        a[2 * idx + 1, 2 * idx] = c
        a[2 * idx, 2 * idx + 1] = -c
        return a
    if kind == "stiefel":
        k = m.k
        nskew = k * (k - 1) // 2
        z = np.zeros((m.n, k))
        top = np.zeros((k, k))
        top[_lower_idx(k)] = c[:nskew]
        z[:k] = top - top.T
        z[k:] = c[nskew:].reshape(m.n - k, k)
        return z
    if kind in ("sphere", "hyperbolic"):
        return c.reshape(-1, 1).copy()
    if kind == "spd":
        a = np.zeros((m.n, m.n))
        a[np.triu_indices(m.n)] = c
        return a + np.triu(a, 1).T
    if kind == "sl":
        n = m.n
        flat = np.zeros(n * n)
        flat[: n * n - 1] = c
        a = flat.reshape(n, n)
        return a - (np.trace(a) / n) * np.eye(n)
    return c.reshape(m.n, m.n).copy()


def algebra_grad_to_coords(point, h):
    """Adjoint of :func:`coords_to_algebra`: maps dF/d(algebra) to dF/d(coords)."""
    m = point.manifold
    kind = m.kind
    if kind == "so":
        return (h - h.T)[_lower_idx(m.n)]
    if kind == "torus":
        idx = np.arange(m.n)
        return h[2 * idx + 1, 2 * idx] - h[2 * idx, 2 * idx + 1]
    if kind == "stiefel":
        k = m.k
        top = h[:k]
        return np.concatenate([(top - top.T)[_lower_idx(k)], h[k:].reshape(-1)])
    if kind in ("sphere", "hyperbolic"):
        return np.asarray(h, dtype=np.float64).reshape(-1).copy()
    if kind == "spd":
        full = h + h.T - np.diag(np.diag(h))
        return full[np.triu_indices(m.n)]
    if kind == "sl":
        n = m.n
        proj = h - (np.trace(h) / n) * np.eye(n)
        return proj.reshape(-1)[: n * n - 1].copy()
    return h.reshape(-1).copy()


def algebra_to_ambient(point, alg):
    m = point.manifold
    b = point.value
    kind = m.kind
    if kind in GROUP_KINDS:
        return b @ alg
    if kind == "stiefel":
        k = m.k
        return b @ alg[:k] + point.frame @ alg[k:]
    if kind in ("sphere", "hyperbolic"):
        return point.frame @ alg
    return point.sqrt @ alg @ point.sqrt


def _tangency_fail(m, resid, scale):
    if resid > TANGENCY_TOL * max(1.0, scale):
        raise TangencyError(f"matrix is not tangent to {m} (residual {resid:.3e})")


def ambient_to_algebra(point, amb):
    m = point.manifold
    amb = np.asarray(amb, dtype=np.float64)
    if amb.ndim == 1:
        amb = amb.reshape(-1, 1)
    if amb.shape != m.ambient_shape:
        raise ShapeError(f"{m} expects shape {m.ambient_shape}, got {amb.shape}")
    b = point.value
    kind = m.kind
    scale = fro_norm(amb)
    if kind in ("so", "torus"):
        a = b.T @ amb
        _tangency_fail(m, fro_norm(a + a.T), scale)
        a = 0.5 * (a - a.T)
        if kind == "torus":
            mask = np.kron(np.eye(m.n), np.ones((2, 2)))
            _tangency_fail(m, fro_norm(a * (1 - mask)), scale)
            a = a * mask
        return a
    if kind == "stiefel":
        k = m.k
        top = b.T @ amb
        _tangency_fail(m, fro_norm(top + top.T), scale)
        return np.vstack([0.5 * (top - top.T), point.frame.T @ amb])
    if kind == "sphere":
        _tangency_fail(m, abs(float(b[:, 0] @ amb[:, 0])), scale)
        return point.frame.T @ amb
    if kind == "hyperbolic":
        _tangency_fail(m, abs(minkowski(b, amb)), scale)
        u = point.frame.copy()
        u[-1] *= -1.0
        return u.T @ amb
    if kind == "spd":
        a = point.isqrt @ amb @ point.isqrt
        _tangency_fail(m, fro_norm(a - a.T), scale)
        return 0.5 * (a + a.T)
    a = lu_solve(b, amb)
    if kind == "sl":
        _tangency_fail(m, abs(float(np.trace(a))), scale)
        a = a - (np.trace(a) / m.n) * np.eye(m.n)
    return a


def algebra_to_coords(point, alg):
    m = point.manifold
    kind = m.kind
    if kind == "so":
        return alg[_lower_idx(m.n)].copy()
    if kind == "torus":
        idx = np.arange(m.n)
        return alg[2 * idx + 1, 2 * idx].copy()
    if kind == "stiefel":
        k = m.k
        return np.concatenate([alg[:k][_lower_idx(k)], alg[k:].reshape(-1)])
    if kind in ("sphere", "hyperbolic"):
        return alg.reshape(-1).copy()
    if kind == "spd":
        return alg[np.triu_indices(m.n)].copy()
    if kind == "sl":
        n = m.n
        shifted = alg - alg[n - 1, n - 1] * np.eye(n)
        return shifted.reshape(-1)[: n * n - 1].copy()
    return alg.reshape(-1).copy()


def coords_to_ambient(t):
    """Ambient tangent vector encoded by chart coordinates ``t``."""
    return algebra_to_ambient(t.base, coords_to_algebra(t.base, t.coords))


def ambient_to_coords(m, base, ambient_tangent):
    """Inverse chart; raises TangencyError when the input is not tangent at ``base``."""
    if base.manifold != m:
        raise ShapeError("base point belongs to a different manifold")
    alg = ambient_to_algebra(base, ambient_tangent)
    return TangentCoords(m, base, algebra_to_coords(base, alg))


def chart_matrix(point):
    """Matrix whose columns are the vectorized images of the coordinate basis."""
    m = point.manifold
    cols = []
    for i in range(m.dim):
        e = np.zeros(m.dim)
        e[i] = 1.0
        cols.append(algebra_to_ambient(point, coords_to_algebra(point, e)).reshape(-1))
    return np.array(cols).T.reshape(-1, m.dim)


def zero_coords(point):
    return TangentCoords(point.manifold, point, np.zeros(point.manifold.dim))


# ------------------------------------------------------------ sampling

def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_point(m, seed):
    """Deterministic sample on ``m`` for a given seed (int, SeedSequence or Generator)."""
    rng = _rng(seed)
    n, kind = m.n, m.kind
    if kind in ("so", "stiefel"):
        cols = n if kind == "so" else m.k
        q = qr_thin(rng.standard_normal((n, cols))).q
        if kind == "so" and det(q) < 0:
            q[:, 0] = -q[:, 0]
        return make_point(m, q)
    if kind == "torus":
        x = np.zeros((2 * n, 2 * n))
        for i, th in enumerate(rng.uniform(-np.pi, np.pi, n)):
            c, s = np.cos(th), np.sin(th)
            x[2 * i:2 * i + 2, 2 * i:2 * i + 2] = [[c, -s], [s, c]]
        return make_point(m, x)
    if kind == "sphere":
        g = rng.standard_normal((n + 1, 1))
        return make_point(m, g / np.sqrt(np.sum(g * g)))
    if kind == "hyperbolic":
        g = rng.standard_normal(n) / np.sqrt(n)
        r = float(np.sqrt(g @ g))
        x = np.zeros((n + 1, 1))
        x[:n, 0] = np.sinh(r) * g / r if r > 0 else 0.0
        x[n, 0] = np.cosh(r)
        return make_point(m, x)
    if kind == "spd":
        g = rng.standard_normal((n, n))
        return make_point(m, g @ g.T + 1e-3 * np.eye(n))
    if kind == "sl":
        while True:
            g = rng.standard_normal((n, n))
            d = det(g)
            if d > 0:
                return make_point(m, g * d ** (-1.0 / n))
    g = rng.standard_normal((n, n))
    if det(g) < 0:
        g[:, 0] = -g[:, 0]
    return make_point(m, g)
