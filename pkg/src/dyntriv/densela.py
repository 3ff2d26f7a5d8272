"""Dense real linear-algebra kernels.

Matrices are plain 2-D ``float64`` numpy arrays; numpy supplies storage and
vectorised arithmetic, while the factorizations (LU, Householder QR, Jacobi
eigen/SVD, Cholesky) are implemented here.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, SingularMatrixError, StructureError

SYM_TOL = 1e-12


def matrix(data):
    """Build a validated matrix from nested sequences or an array.

    1-D input becomes a column. Non-finite entries raise ``ValueError``.
    """
    a = np.array(data, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.size == 0:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _check_2d(a, name="a"):
    if not isinstance(a, np.ndarray) or a.ndim != 2:
        raise ShapeError(f"{name} must be a 2-D array")


def _check_square(a, name="a"):
    _check_2d(a, name)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got {a.shape}")


@dataclass(frozen=True)
class QRFactors:
    q: np.ndarray
    r: np.ndarray


@dataclass(frozen=True)
class SymEig:
    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class SvdFactors:
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def matmul(a, b):
    _check_2d(a, "a")
    _check_2d(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def fro_inner(a, b):
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sum(a * b))


def fro_norm(a):
    return float(np.sqrt(np.sum(a * a)))


# ---------------------------------------------------------------- LU

def lu_factor(a):
    """Partial-pivoting LU. Returns ``(lu, perm, sign)`` with ``a[perm] = L U``."""
    _check_square(a)
    n = a.shape[0]
    lu = np.array(a, dtype=np.float64, copy=True)
    perm = np.arange(n)
    sign = 1.0
    thresh = 1e-300 * fro_norm(a)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= thresh:
            raise SingularMatrixError(f"zero pivot in column {k}")
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, perm, sign


def _lu_substitute(lu, perm, b):
    n = lu.shape[0]
    x = np.array(b[perm], dtype=np.float64, copy=True)
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] -= lu[i, i + 1:] @ x[i + 1:]
        x[i] /= lu[i, i]
    return x


def lu_solve(a, b):
    """Solve ``a x = b`` by LU with partial pivoting.

    Raises SingularMatrixError when a pivot vanishes to working precision.
    """
    _check_square(a)
    _check_2d(b, "b")
    if b.shape[0] != a.shape[0]:
        raise ShapeError(f"rhs has {b.shape[0]} rows, matrix has {a.shape[0]}")
    lu, perm, _ = lu_factor(a)
    return _lu_substitute(lu, perm, b)


def solve_right(a, b):
    """Return ``b a^{-1}`` (solves ``x a = b``) without forming the inverse."""
    return lu_solve(a.T, b.T).T


def det(a):
    _check_square(a)
    try:
        lu, _, sign = lu_factor(a)
    except SingularMatrixError:
        return 0.0
    return float(sign * np.prod(np.diag(lu)))


def cholesky(a, tol=0.0):
    """Lower-triangular ``L`` with ``L L^T = a``.

    Raises SingularMatrixError if a pivot is ``<= tol`` (matrix not positive
    definite).
    """
    _check_square(a)
    n = a.shape[0]
    low = np.zeros_like(a, dtype=np.float64)
    for j in range(n):
        d = a[j, j] - low[j, :j] @ low[j, :j]
        if not d > tol:
            raise SingularMatrixError(f"matrix is not positive definite (pivot {j})")
        low[j, j] = np.sqrt(d)
        low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


# ---------------------------------------------------------------- QR

def _householder(a):
    """Householder reduction of ``a`` (m x k, m >= k).

    Returns the list of reflectors ``(v, beta)`` and the k x k triangle.
    """
    m, k = a.shape
    r = np.array(a, dtype=np.float64, copy=True)
    reflectors = []
    for j in range(k):
        x = r[j:, j]
        alpha = np.sqrt(x @ x)
        if alpha == 0.0:
            reflectors.append(None)
            continue
        v = x.copy()
        v[0] += alpha if x[0] >= 0 else -alpha
        vv = v @ v
        beta = 2.0 / vv
        r[j:, j:] -= beta * np.outer(v, v @ r[j:, j:])
        r[j + 1:, j] = 0.0
        reflectors.append((v, beta))
    return reflectors, np.triu(r[:k, :])


def _apply_reflectors(reflectors, q):
    # q <- H_0 H_1 ... H_{k-1} q
    for j in range(len(reflectors) - 1, -1, -1):
        h = reflectors[j]
        if h is None:
            continue
        v, beta = h
        q[j:, :] -= beta * np.outer(v, v @ q[j:, :])
    return q


def qr_thin(a):
    """Householder thin QR with a non-negative diagonal of ``r``."""
    _check_2d(a)
    m, k = a.shape
    if m < k:
        raise ShapeError(f"qr_thin needs rows >= cols, got {a.shape}")
    reflectors, r = _householder(a)
    q = _apply_reflectors(reflectors, np.eye(m, k))
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    q = q * signs
    r = signs[:, None] * r
    return QRFactors(q=q, r=r)


def qr_complete(a):
    """Orthogonal ``m x m`` matrix whose first k columns are the thin-QR ``q`` of ``a``.

    The trailing ``m - k`` columns span the orthogonal complement of range(a)
    when ``a`` has full column rank.
    """
    _check_2d(a)
    m, k = a.shape
    if m < k:
        raise ShapeError(f"qr_complete needs rows >= cols, got {a.shape}")
    reflectors, r = _householder(a)
    q = _apply_reflectors(reflectors, np.eye(m))
    signs = np.ones(m)
    signs[:k] = np.where(np.diag(r) < 0, -1.0, 1.0)
    return q * signs


# ---------------------------------------------------------------- Jacobi

def _round_robin(n):
    """Yield rounds of disjoint index pairs covering every pair once per sweep."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p < 0 or q < 0:
                continue
            if p > q:
                p, q = q, p
            ps.append(p)
            qs.append(q)
        if ps:
            rounds.append((np.array(ps), np.array(qs)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _jacobi_angles(zeta):
    t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c


def sym_eig(a, max_sweeps=100):
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Eigenvalues ascending; eigenvectors are the columns of ``vectors``.
    Asymmetry beyond ``1e-12 * max(1, ||a||)`` is rejected.
    """
    _check_square(a)
    n = a.shape[0]
    scale = fro_norm(a)
    if fro_norm(a - a.T) > SYM_TOL * max(1.0, scale):
        raise StructureError("sym_eig requires a symmetric matrix")
    w = 0.5 * (a + a.T)
    v = np.eye(n)
    tol = 1e-14 * scale
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        off = w - np.diag(np.diag(w))
        if fro_norm(off) <= tol:
            break
        for ps, qs in rounds:
            apq = w[ps, qs]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            ps, qs, apq = ps[active], qs[active], apq[active]
            zeta = (w[qs, qs] - w[ps, ps]) / (2.0 * apq)
            c, s = _jacobi_angles(zeta)
            wp, wq = w[:, ps].copy(), w[:, qs]
            w[:, ps] = c * wp - s * wq
            w[:, qs] = s * wp + c * wq
            wp, wq = w[ps, :].copy(), w[qs, :]
            w[ps, :] = c[:, None] * wp - s[:, None] * wq
            w[qs, :] = s[:, None] * wp + c[:, None] * wq
            # the rotation zeroes these entries exactly in exact arithmetic
            w[ps, qs] = 0.0
            w[qs, ps] = 0.0
            vp, vq = v[:, ps].copy(), v[:, qs]
            v[:, ps] = c * vp - s * vq
            v[:, qs] = s * vp + c * vq
    values = np.diag(w).copy()
    order = np.argsort(values, kind="stable")
    return SymEig(values=values[order], vectors=v[:, order])


def _orthonormal_completion(u, keep):
    """Replace columns of ``u`` not in ``keep`` with an orthonormal completion."""
    m, k = u.shape
    good = u[:, keep]
    full = qr_complete(good) if good.shape[1] else np.eye(m)
    extra = full[:, good.shape[1]:]
    out = u.copy()
    out[:, ~keep] = extra[:, : int(np.sum(~keep))]
    return out


def svd(a, max_sweeps=100):
    """One-sided (Hestenes) Jacobi SVD.

    For an ``m x n`` input returns ``u`` (m x p), descending ``sigma`` (p,) and
    ``v`` (n x p) with ``p = min(m, n)`` and ``a = u diag(sigma) v^T``.
    """
    _check_2d(a)
    m, n = a.shape
    if m < n:
        f = svd(a.T, max_sweeps)
        return SvdFactors(u=f.v, sigma=f.sigma, v=f.u)
    w = np.array(a, dtype=np.float64, copy=True)
    v = np.eye(n)
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        rotated = False
        for ps, qs in rounds:
            wp, wq = w[:, ps], w[:, qs]
            alpha = np.sum(wp * wp, axis=0)
            beta = np.sum(wq * wq, axis=0)
            gamma = np.sum(wp * wq, axis=0)
            active = np.abs(gamma) > 1e-15 * np.sqrt(alpha * beta)
            active &= (alpha > 0) & (beta > 0)
            if not np.any(active):
                continue
            rotated = True
            ps, qs = ps[active], qs[active]
            zeta = (beta[active] - alpha[active]) / (2.0 * gamma[active])
            c, s = _jacobi_angles(zeta)
            wp, wq = w[:, ps].copy(), w[:, qs]
            w[:, ps] = c * wp - s * wq
            w[:, qs] = s * wp + c * wq
            vp, vq = v[:, ps].copy(), v[:, qs]
            v[:, ps] = c * vp - s * vq
            v[:, qs] = s * vp + c * vq
        if not rotated:
            break
    sigma = np.sqrt(np.sum(w * w, axis=0))
    order = np.argsort(-sigma, kind="stable")
    sigma, w, v = sigma[order], w[:, order], v[:, order]
    keep = sigma > 1e-300 + 1e-15 * (sigma[0] if n else 0.0)
    u = np.zeros_like(w)
    u[:, keep] = w[:, keep] / sigma[keep]
    if not np.all(keep):
        u = _orthonormal_completion(u, keep)
    return SvdFactors(u=u, sigma=sigma, v=v)
