"""Matrix exponential, its Fréchet derivative and the gradients built on them.

``expm`` is the degree {3,5,7,9,13} scaling-and-squaring Padé method.
``dexpm`` computes L(A, E) = (d exp)_A(E); the default route reads it off
the top-right block of exp([[A, E], [0, A]]), and ``method="coupled"`` runs
the scaling-and-squaring recurrence that carries L alongside exp(A).

The gradient helpers rest on one identity: under the Frobenius inner
product the adjoint of (d exp)_A is (d exp)_{A^T}.
"""

import math
from dataclasses import dataclass

import numpy as np

from .densela import _lu_substitute, fro_norm, lu_factor, lu_solve, sym_eig
from .errors import ShapeError, StructureError

_B3 = (120.0, 60.0, 12.0, 1.0)
_B5 = (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0)
_B7 = (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0)
_B9 = (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
       2162160.0, 110880.0, 3960.0, 90.0, 1.0)
_B13 = (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
        16380.0, 182.0, 1.0)
_PADE = {3: _B3, 5: _B5, 7: _B7, 9: _B9, 13: _B13}

# backward-error thresholds theta_m for exp (double precision)
THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
         7: 9.504178996162932e-1, 9: 2.097847961257068e0,
         13: 5.371920351148152e0}
# thresholds ell_m for the coupled exp/Fréchet recurrence
_ELL = {3: 1.08e-2, 5: 2.00e-1, 7: 7.83e-1, 9: 1.78e0, 13: 4.74e0}


@dataclass(frozen=True)
class ExpmReport:
    value: np.ndarray
    squarings: int
    pade_degree: int


def _square(a, name="a"):
    if not isinstance(a, np.ndarray) or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be a square matrix")


def _same_shape(a, e):
    _square(a)
    if e.shape != a.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {e.shape}")


def _norm1(a):
    return float(np.max(np.sum(np.abs(a), axis=0)))


def _select(norm, table):
    for m in (3, 5, 7, 9):
        if norm <= table[m]:
            return m, 0
    s = max(0, int(math.ceil(math.log2(norm / table[13]))))
    return 13, s


def _pade_uv(a, m):
    b = _PADE[m]
    n = a.shape[0]
    ident = np.eye(n)
    a2 = a @ a
    if m == 13:
        a4 = a2 @ a2
        a6 = a2 @ a4
        u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
                 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
        v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
             + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
        return u, v
    powers = [ident, a2]
    while len(powers) < (m + 1) // 2:
        powers.append(powers[-1] @ a2)
    u = a @ sum(b[2 * j + 1] * powers[j] for j in range(len(powers)))
    v = sum(b[2 * j] * powers[j] for j in range(len(powers)))
    return u, v


def expm_report(a):
    """Scaling-and-squaring exponential with the chosen parameters."""
    _square(a)
    norm = _norm1(a)
    m, s = _select(norm, THETA)
    scaled = a * 2.0 ** -s if s else a
    u, v = _pade_uv(scaled, m)
    x = lu_solve(v - u, v + u)
    for _ in range(s):
        x = x @ x
    return ExpmReport(value=x, squarings=s, pade_degree=m)


def expm(a):
    return expm_report(a).value


def _dpade_uv(a, e, m):
    """Padé numerator/denominator pieces and their directional derivatives."""
    b = _PADE[m]
    n = a.shape[0]
    ident = np.eye(n)
    a2 = a @ a
    m2 = a @ e + e @ a
    if m == 13:
        a4 = a2 @ a2
        m4 = a2 @ m2 + m2 @ a2
        a6 = a2 @ a4
        m6 = a4 @ m2 + m4 @ a2
        w1 = b[13] * a6 + b[11] * a4 + b[9] * a2
        w2 = b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident
        z1 = b[12] * a6 + b[10] * a4 + b[8] * a2
        z2 = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
        w = a6 @ w1 + w2
        u = a @ w
        v = a6 @ z1 + z2
        lw1 = b[13] * m6 + b[11] * m4 + b[9] * m2
        lw2 = b[7] * m6 + b[5] * m4 + b[3] * m2
        lz1 = b[12] * m6 + b[10] * m4 + b[8] * m2
        lz2 = b[6] * m6 + b[4] * m4 + b[2] * m2
        lw = a6 @ lw1 + m6 @ w1 + lw2
        lu = a @ lw + e @ w
        lv = a6 @ lz1 + m6 @ z1 + lz2
        return u, v, lu, lv
    # even powers A^{2j} and their derivatives M_{2j}
    pw, dpw = [ident, a2], [np.zeros_like(a), m2]
    while len(pw) < (m + 1) // 2:
        pw.append(pw[-1] @ a2)
        dpw.append(dpw[-1] @ a2 + pw[-2] @ m2)
    w = sum(b[2 * j + 1] * pw[j] for j in range(len(pw)))
    lw = sum(b[2 * j + 1] * dpw[j] for j in range(len(pw)))
    u = a @ w
    v = sum(b[2 * j] * pw[j] for j in range(len(pw)))
    lu = a @ lw + e @ w
    lv = sum(b[2 * j] * dpw[j] for j in range(len(pw)))
    return u, v, lu, lv


def expm_frechet_coupled(a, e):
    """Return ``(exp(A), L(A, E))`` via the coupled scaling-and-squaring recurrence."""
    _same_shape(a, e)
    m, s = _select(_norm1(a), _ELL)
    if s:
        a = a * 2.0 ** -s
        e = e * 2.0 ** -s
    u, v, lu, lv = _dpade_uv(a, e, m)
    fac, perm, _ = lu_factor(v - u)
    r = _lu_substitute(fac, perm, u + v)
    ell = _lu_substitute(fac, perm, lu + lv + (lu - lv) @ r)
    for _ in range(s):
        ell = r @ ell + ell @ r
        r = r @ r
    return r, ell


def dexpm(a, e, method="block"):
    """Fréchet derivative ``L(A, E)`` of the matrix exponential.

    ``method="block"`` takes the top-right block of ``exp([[A, E], [0, A]])``;
    ``method="coupled"`` uses :func:`expm_frechet_coupled`.
    """
    _same_shape(a, e)
    if method == "coupled":
        return expm_frechet_coupled(a, e)[1]
    if method != "block":
        raise ValueError(f"unknown dexpm method {method!r}")
    n = a.shape[0]
    enorm = fro_norm(e)
    if enorm == 0.0:
        return np.zeros_like(a)
    # L is linear in E; rescaling keeps E from inflating the squaring count
    c = max(fro_norm(a), 1.0) / enorm
    big = np.zeros((2 * n, 2 * n))
    big[:n, :n] = a
    big[n:, n:] = a
    big[:n, n:] = c * e
    return expm(big)[:n, n:] / c


def expm_grad(a, g):
    """Gradient of ``f o exp`` at ``a`` given the ambient gradient ``g`` of f at ``e^a``."""
    _same_shape(a, g)
    return dexpm(a.T, g)


def lie_exp_grad(b, a, g):
    """Gradient of ``y -> f(b exp(b^{-1} y))`` at ``y = a`` (Frobenius metric).

    ``g`` is the ambient gradient of f at ``b exp(b^{-1} a)``. Inverses of b
    enter only through linear solves.
    """
    _same_shape(b, a)
    _same_shape(b, g)
    alg = lu_solve(b, a)
    inner = dexpm(alg.T, b.T @ g)
    return lu_solve(b.T, inner)


def lie_exp_grad_left_invariant(b, a, g):
    """Gradient of ``y -> f(b exp(b^{-1} y))`` for the left-invariant metric at b.

    With ``<X, Y>_b = tr((b^{-1}X)^T b^{-1}Y)`` on both sides this is
    ``b (d exp)_{A^T}(b^{-1} g)``, ``A = b^{-1} a``.
    """
    _same_shape(b, a)
    _same_shape(b, g)
    alg = lu_solve(b, a)
    return b @ dexpm(alg.T, lu_solve(b, g))


def lie_injectivity_check(a, tol=1e-8, structure_tol=1e-10):
    """True iff every eigenvalue of ``a`` has ``|Im(lambda)| < pi - tol``.

    Only symmetric (real spectrum) and skew-symmetric inputs are supported;
    anything else raises StructureError.
    """
    _square(a)
    scale = max(1.0, fro_norm(a))
    if fro_norm(a - a.T) <= structure_tol * scale:
        return True
    if fro_norm(a + a.T) > structure_tol * scale:
        raise StructureError("injectivity check supports symmetric or skew-symmetric input only")
    skew = 0.5 * (a - a.T)
    # eigenvalues of -A^2 = A^T A are the squared imaginary parts
    top = max(0.0, float(sym_eig(skew.T @ skew).values[-1]))
    return math.sqrt(top) < math.pi - tol


__all__ = [
    "ExpmReport", "THETA", "expm", "expm_report", "dexpm", "expm_frechet_coupled",
    "expm_grad", "lie_exp_grad", "lie_exp_grad_left_invariant",
    "lie_injectivity_check",
]
