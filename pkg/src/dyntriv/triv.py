"""Trivializations phi_B: T_B M -> M, their values and pullback gradients.

A trivialization is evaluated on chart coordinates. ``pullback_grad``
returns the gradient of ``y -> f(phi_B(y))`` in those coordinates, given the
ambient (entrywise) gradient of f at ``phi_B(y)``. Each map is
differentiated with respect to the chart's algebra element (see
:mod:`dyntriv.manifolds`) and the chart adjoint finishes the job.
"""

from dataclasses import dataclass

import numpy as np

from . import manifolds as mf
from .densela import cholesky, det, fro_norm, lu_solve, qr_thin, solve_right, svd
from .errors import ConfigError, DomainError, ShapeError, SingularMatrixError
from .matexp import expm, expm_grad, lie_exp_grad

KIND_NAMES = ("lie_exp", "riemannian_exp", "cayley", "projector", "squaring", "cholesky")

SUPPORT = {
    "lie_exp": frozenset({"so", "torus", "sl", "glp"}),
    "riemannian_exp": frozenset(mf.KINDS),
    "cayley": frozenset({"so"}),
    "projector": frozenset({"so", "sphere"}),
    "squaring": frozenset({"spd"}),
    "cholesky": frozenset({"spd"}),
}

FD_STEP = 1e-5


@dataclass(frozen=True)
class Trivialization:
    kind: str
    manifold: mf.ManifoldSpec

    def __post_init__(self):
        if self.kind not in SUPPORT:
            raise ConfigError(f"unknown trivialization {self.kind!r}")
        if self.manifold.kind not in SUPPORT[self.kind]:
            raise ConfigError(f"{self.kind} is not available on {self.manifold}")


@dataclass(frozen=True)
class PullbackGradient:
    coords_grad: np.ndarray


def supported_pairs():
    """All (trivialization kind, manifold kind) pairs in the support table."""
    return [(t, m) for t in KIND_NAMES for m in mf.KINDS if m in SUPPORT[t]]


# ------------------------------------------------------------ closed-form maps

def _sinc(r):
    if r < 1e-8:
        return 1.0 - r * r / 6.0
    return np.sin(r) / r


def _sinc_d_over_r(r):
    # (d/dr sinc(r)) / r
    if r < 1e-2:
        r2 = r * r
        return -1.0 / 3.0 + r2 / 30.0 - r2 * r2 / 840.0
    return (np.cos(r) - np.sin(r) / r) / (r * r)


def _sinhc(r):
    if r < 1e-8:
        return 1.0 + r * r / 6.0
    return np.sinh(r) / r


def _sinhc_d_over_r(r):
    if r < 1e-2:
        r2 = r * r
        return 1.0 / 3.0 + r2 / 30.0 + r2 * r2 / 840.0
    return (np.cosh(r) - np.sinh(r) / r) / (r * r)


def sphere_exp(x, v):
    """Great-circle geodesic ``cos(|v|) x + sin(|v|) v/|v|``."""
    r = float(np.sqrt(np.sum(v * v)))
    return np.cos(r) * x + _sinc(r) * v


def hyperbolic_exp(x, v):
    """Hyperboloid geodesic ``cosh(|v|_H) x + sinh(|v|_H) v/|v|_H``."""
    r = float(np.sqrt(max(mf.minkowski(v, v), 0.0)))
    return np.cosh(r) * x + _sinhc(r) * v


def cayley(a):
    """Cayley transform ``(I + A)(I - A)^{-1}``."""
    ident = np.eye(a.shape[0])
    try:
        return solve_right(ident - a, ident + a)
    except SingularMatrixError as exc:
        raise DomainError("I - A is singular") from exc


def _polar_factors(x):
    """SVD of x with the special-orthogonal sign fix.

    Returns ``(u, sigma, v)`` with ``u v^T`` in SO(n); when det(x) < 0 the
    column of u for the smallest singular value and that singular value
    carry a flipped sign.
    """
    f = svd(x)
    u, sigma, v = f.u.copy(), f.sigma.copy(), f.v
    if sigma[-1] <= 1e-12 * max(sigma[0], 1e-300):
        raise DomainError("projection onto SO(n) is undefined for singular input")
    if det(u) * det(v) < 0:
        u[:, -1] = -u[:, -1]
        sigma[-1] = -sigma[-1]
    return u, sigma, v


def project_so(x):
    """Closest special-orthogonal matrix ``U V^T`` (sign-fixed)."""
    u, _, v = _polar_factors(x)
    return u @ v.T


def stiefel_exp(b, amb, variant="transpose"):
    """Canonical-metric geodesic on St(n, k) from ``b`` with velocity ``amb``.

    ``variant="untransposed"`` uses the block ``[[A, -R], [R, 0]]`` instead of
    ``[[A, -R^T], [R, 0]]``; it is kept only to compare the two forms.
    """
    if variant not in ("transpose", "untransposed"):
        raise ValueError(f"unknown Stiefel variant {variant!r}")
    n, k = b.shape
    point = mf.make_point(mf.Stiefel(n, k), b)
    z = mf.ambient_to_algebra(point, amb)
    return _stiefel_value(b, point.frame, z, variant)


def _stiefel_value(b, frame, z, variant="transpose"):
    n, k = b.shape
    a, a_perp = z[:k], z[k:]
    if n - k >= k:
        # thin QR of (I - B B^T) A~ = B_perp A_perp, taken through A_perp so Q stays orthogonal to B
        f = qr_thin(a_perp)
        q, r = frame @ f.q, f.r
        blk = np.zeros((2 * k, 2 * k))
        blk[:k, :k] = a
        blk[:k, k:] = -r.T if variant == "transpose" else -r
        blk[k:, :k] = r
        return np.hstack([b, q]) @ expm(blk)[:, :k]
    if variant != "transpose":
        raise ValueError("the untransposed block form needs n - k >= k")
    omega = np.zeros((n, n))
    omega[:k, :k] = a
    omega[k:, :k] = a_perp
    omega[:k, k:] = -a_perp.T
    return np.hstack([b, frame]) @ expm(omega)[:, :k]


def _stiefel_grad(b, frame, z, g):
    # value = W exp(Omega) E with W = [B B_perp], E = [I_k; 0]; same map as the QR form
    n, k = b.shape
    a, a_perp = z[:k], z[k:]
    omega = np.zeros((n, n))
    omega[:k, :k] = a
    omega[k:, :k] = a_perp
    omega[:k, k:] = -a_perp.T
    w = np.hstack([b, frame])
    outer = np.zeros((n, n))
    outer[:, :k] = w.T @ g
    h = expm_grad(omega, outer)
    return np.vstack([h[:k, :k], h[k:, :k] - h[:k, k:].T])


def _sym(x):
    return 0.5 * (x + x.T)


def _squaring_parts(point, a):
    s, u = point.eig
    kern = np.outer(s, s) / (s[:, None] + s[None, :])
    w = u @ (kern * (u.T @ a @ u)) @ u.T
    return point.sqrt + w, kern, u


def _phi_lower(y):
    return np.tril(y, -1) + 0.5 * np.diag(np.diag(y))


def _cholesky_factor(point, a):
    low0 = point.chol
    amb = point.sqrt @ a @ point.sqrt
    y = solve_right(low0.T, lu_solve(low0, amb))
    low = low0 + low0 @ _phi_lower(y)
    if np.min(np.diag(low)) <= 1e-12:
        raise DomainError("Cholesky retraction left the positive-diagonal domain")
    return low


# ------------------------------------------------------------ dispatch

def _coords(t, base, y):
    if base.manifold != t.manifold:
        raise ShapeError("base point lies on a different manifold")
    if isinstance(y, mf.TangentCoords):
        y = y.coords
    c = np.asarray(y, dtype=np.float64).reshape(-1)
    if c.size != t.manifold.dim:
        raise ShapeError(f"expected {t.manifold.dim} coordinates, got {c.size}")
    if not np.all(np.isfinite(c)):
        raise ValueError("coordinates must be finite")
    return c


def _value_from_algebra(t, base, a):
    kind, mkind = t.kind, t.manifold.kind
    b = base.value
    if kind == "lie_exp" or (kind == "riemannian_exp" and mkind in ("so", "torus")):
        return b @ expm(a)
    if kind == "riemannian_exp":
        if mkind in ("sl", "glp"):
            return b @ expm(a.T) @ expm(a - a.T)
        if mkind == "stiefel":
            return _stiefel_value(b, base.frame, a)
        if mkind == "sphere":
            return sphere_exp(b, base.frame @ a)
        if mkind == "hyperbolic":
            r = float(np.sqrt(np.sum(a * a)))
            return np.cosh(r) * b + _sinhc(r) * (base.frame @ a)
        return _sym(base.sqrt @ expm(a) @ base.sqrt)
    if kind == "cayley":
        return b @ cayley(0.5 * a)
    if kind == "projector":
        if mkind == "so":
            return project_so(b + b @ a)
        w = b + base.frame @ a
        return w / np.sqrt(np.sum(w * w))
    if kind == "squaring":
        root, _, _ = _squaring_parts(base, a)
        val = _sym(root @ root)
        try:
            cholesky(val)
        except SingularMatrixError as exc:
            raise DomainError("squaring retraction left the SPD cone") from exc
        return val
    low = _cholesky_factor(base, a)
    return _sym(low @ low.T)


def _algebra_grad(t, base, a, g):
    kind, mkind = t.kind, t.manifold.kind
    b = base.value
    if kind == "lie_exp" or (kind == "riemannian_exp" and mkind in ("so", "torus")):
        return b.T @ lie_exp_grad(b, b @ a, g)
    if kind == "riemannian_exp":
        if mkind in ("sl", "glp"):
            p = expm(a.T)
            q = expm(a - a.T)
            hq = expm_grad(a - a.T, p.T @ b.T @ g)
            return expm_grad(a.T, b.T @ g @ q.T).T + hq - hq.T
        if mkind == "stiefel":
            return _stiefel_grad(b, base.frame, a, g)
        if mkind in ("sphere", "hyperbolic"):
            r = float(np.sqrt(np.sum(a * a)))
            v = base.frame @ a
            gx, gv = float(np.sum(g * b)), float(np.sum(g * v))
            ug = base.frame.T @ g
            if mkind == "sphere":
                return _sinc(r) * ug + (-_sinc(r) * gx + _sinc_d_over_r(r) * gv) * a
            return _sinhc(r) * ug + (_sinhc(r) * gx + _sinhc_d_over_r(r) * gv) * a
        gs = base.sqrt @ _sym(g) @ base.sqrt
        return expm_grad(a, gs)
    if kind == "cayley":
        half = 0.5 * a
        ident = np.eye(a.shape[0])
        c = cayley(half)
        # d cay(H) = (I + cay(H)) dH (I - H)^{-1}, H = A/2
        left = (ident + c).T @ b.T @ g
        return 0.5 * solve_right((ident - half).T, left)
    if kind == "projector":
        if mkind == "so":
            u, sigma, v = _polar_factors(b + b @ a)
            mm = u.T @ g @ v
            denom = sigma[:, None] + sigma[None, :]
            np.fill_diagonal(denom, 1.0)
            if np.min(np.abs(denom)) <= 1e-12 * abs(sigma[0]):
                raise DomainError("projection onto SO(n) is not differentiable here")
            psi = (mm - mm.T) / denom
            return b.T @ (u @ psi @ v.T)
        w = b + base.frame @ a
        nw = float(np.sqrt(np.sum(w * w)))
        gw = g / nw - w * (float(np.sum(w * g)) / nw ** 3)
        return base.frame.T @ gw
    gs = _sym(g)
    if kind == "squaring":
        root, kern, u = _squaring_parts(base, a)
        gt = gs @ root + root @ gs
        return u @ (kern * (u.T @ gt @ u)) @ u.T
    low0 = base.chol
    low = _cholesky_factor(base, a)
    grad_l = 2.0 * gs @ low
    gy = _phi_lower(low0.T @ grad_l)
    # adjoint of X -> L0^{-1} X L0^{-T}
    g_amb = solve_right(low0, lu_solve(low0.T, gy))
    return base.sqrt @ g_amb @ base.sqrt


def value_matrix(t, base, y):
    """Ambient matrix ``phi_base(y)``."""
    c = _coords(t, base, y)
    return _value_from_algebra(t, base, mf.coords_to_algebra(base, c))


def value(t, base, y):
    """Point ``phi_base(y)``."""
    return mf.make_point(t.manifold, value_matrix(t, base, y))


def fd_pullback_grad(t, base, y, ambient_grad, h=FD_STEP):
    """Central-difference pullback gradient of ``y -> <G, phi_base(y)>``."""
    c = _coords(t, base, y)
    out = np.empty_like(c)
    for i in range(c.size):
        e = np.zeros_like(c)
        e[i] = h
        plus = value_matrix(t, base, c + e)
        minus = value_matrix(t, base, c - e)
        out[i] = float(np.sum(ambient_grad * (plus - minus))) / (2.0 * h)
    return out


def pullback_grad(t, base, y, ambient_grad, method="closed"):
    """Gradient in chart coordinates of ``y -> f(phi_base(y))``.

    ``ambient_grad`` is the entrywise gradient of f at ``phi_base(y)``.
    ``method="fd"`` switches to central finite differences.
    """
    c = _coords(t, base, y)
    g = np.asarray(ambient_grad, dtype=np.float64)
    if g.ndim == 1:
        g = g.reshape(-1, 1)
    if g.shape != t.manifold.ambient_shape:
        raise ShapeError(f"ambient gradient must have shape {t.manifold.ambient_shape}")
    if method == "fd":
        return PullbackGradient(fd_pullback_grad(t, base, c, g))
    if method != "closed":
        raise ValueError(f"unknown gradient method {method!r}")
    a = mf.coords_to_algebra(base, c)
    h = _algebra_grad(t, base, a, g)
    return PullbackGradient(mf.algebra_grad_to_coords(base, h))


def is_retraction_check(t, base, seed, n_dirs=8, h=FD_STEP):
    """Largest deviation of the central-difference velocity of phi at 0 from the chart.

    A retraction has ``(d phi_base)_0 = Id``; the returned number should be
    at most ``1e-4 * (1 + ||base||)``.
    """
    rng = np.random.default_rng(seed)
    dim = t.manifold.dim
    worst = 0.0
    for _ in range(n_dirs):
        e = rng.standard_normal(dim)
        e /= max(np.sqrt(e @ e), 1e-300)
        vel = (value_matrix(t, base, h * e) - value_matrix(t, base, -h * e)) / (2.0 * h)
        chart = mf.coords_to_ambient(mf.TangentCoords(t.manifold, base, e))
        worst = max(worst, fro_norm(vel - chart))
    return worst
