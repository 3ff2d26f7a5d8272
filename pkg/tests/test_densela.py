import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyntriv import densela as la
from dyntriv.errors import ShapeError, SingularMatrixError, StructureError


def rand(n, m=None, seed=0):
    return np.random.default_rng(seed).standard_normal((n, m or n))


def test_matrix_validation():
    assert la.matrix([1.0, 2.0]).shape == (2, 1)
    with pytest.raises(ValueError):
        la.matrix([[1.0, np.nan]])
    with pytest.raises(ValueError):
        la.matrix([[np.inf]])


def test_matmul_examples():
    a = rand(3)
    assert np.array_equal(la.matmul(np.eye(3), a), a)
    assert np.array_equal(la.matmul(la.matrix([[1, 2], [3, 4]]), la.matrix([[0, 1], [1, 0]])), [[2, 1], [4, 3]])
    assert np.array_equal(la.matmul(a, np.zeros((3, 2))), np.zeros((3, 2)))
    with pytest.raises(ShapeError):
        la.matmul(np.eye(2), np.eye(3))


def test_fro():
    assert la.fro_inner(np.eye(2), np.eye(2)) == 2.0
    assert la.fro_norm(np.array([[3.0, 4.0], [0.0, 0.0]])) == 5.0
    a, b = rand(4, seed=1), rand(4, seed=2)
    assert la.fro_inner(a, b) == pytest.approx(la.fro_inner(b, a), rel=1e-15)


def test_lu_solve_examples():
    b = rand(3, 2)
    assert np.allclose(la.lu_solve(np.eye(3), b), b, atol=0)
    assert np.allclose(la.lu_solve(np.diag([2.0, 4.0]), np.array([[2.0], [8.0]])), [[1.0], [2.0]])
    with pytest.raises(SingularMatrixError):
        la.lu_solve(np.zeros((2, 2)), np.ones((2, 1)))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
def test_lu_solve_matches_numpy(n, seed):
    a = rand(n, seed=seed) + n * np.eye(n)
    b = rand(n, 3, seed=seed + 1)
    assert np.allclose(la.lu_solve(a, b), np.linalg.solve(a, b), rtol=1e-10, atol=1e-12)
    assert la.det(a) == pytest.approx(np.linalg.det(a), rel=1e-10)
    assert np.allclose(la.solve_right(a, b.T) @ a, b.T, atol=1e-10)


def test_cholesky():
    a = rand(5)
    spd = a @ a.T + np.eye(5)
    low = la.cholesky(spd)
    assert np.allclose(np.triu(low, 1), 0.0)
    assert np.allclose(low @ low.T, spd, atol=1e-12)
    with pytest.raises(SingularMatrixError):
        la.cholesky(np.diag([1.0, -1.0]))


def test_qr_examples():
    f = la.qr_thin(np.eye(4))
    assert np.array_equal(f.q, np.eye(4)) and np.array_equal(f.r, np.eye(4))
    e1 = np.zeros((3, 1))
    e1[0] = 1.0
    f = la.qr_thin(e1)
    assert np.allclose(f.q, e1) and np.allclose(f.r, [[1.0]])
    f = la.qr_thin(np.array([[3.0], [4.0]]))
    assert f.r[0, 0] == pytest.approx(5.0, abs=1e-15)
    assert np.allclose(f.q, [[0.6], [0.8]], atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 20), k=st.integers(1, 20), seed=st.integers(0, 2**32 - 1))
def test_qr_invariants(m, k, seed):
    if k > m:
        m, k = k, m
    a = rand(m, k, seed=seed)
    f = la.qr_thin(a)
    assert np.abs(f.q.T @ f.q - np.eye(k)).max() <= 1e-12
    assert np.all(np.tril(f.r, -1) == 0.0)
    assert np.all(f.r.diagonal() >= 0)
    assert np.allclose(f.q @ f.r, a, atol=1e-12 * max(1, la.fro_norm(a)))
    full = la.qr_complete(a)
    assert full.shape == (m, m)
    assert np.abs(full.T @ full - np.eye(m)).max() <= 1e-12
    assert np.allclose(full[:, :k], f.q, atol=1e-12)


def test_sym_eig_examples():
    assert np.allclose(la.sym_eig(np.diag([3.0, 1.0])).values, [1.0, 3.0])
    assert np.allclose(la.sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]])).values, [-1.0, 1.0], atol=1e-15)
    e = la.sym_eig(np.eye(3))
    assert np.allclose(e.values, 1.0) and np.allclose(np.abs(e.vectors), np.eye(3))
    with pytest.raises(StructureError):
        la.sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 30), seed=st.integers(0, 2**32 - 1))
def test_sym_eig_invariants(n, seed):
    a = rand(n, seed=seed)
    a = a + a.T
    e = la.sym_eig(a)
    norm = la.fro_norm(a)
    assert np.abs(e.vectors.T @ e.vectors - np.eye(n)).max() <= 1e-12
    assert np.abs(a @ e.vectors - e.vectors * e.values).max() <= 1e-10 * norm
    assert np.all(np.diff(e.values) >= 0)
    assert np.allclose(e.values, np.linalg.eigvalsh(a), atol=1e-12 * max(1, norm))


def test_svd_examples():
    assert np.allclose(la.svd(np.eye(3)).sigma, 1.0)
    f = la.svd(np.diag([3.0, -2.0]))
    assert np.allclose(f.sigma, [3.0, 2.0])
    assert np.allclose((f.u * f.sigma) @ f.v.T, np.diag([3.0, -2.0]))
    f = la.svd(np.zeros((3, 3)))
    assert np.all(f.sigma == 0.0)
    assert np.allclose(f.u.T @ f.u, np.eye(3)) and np.allclose(f.v.T @ f.v, np.eye(3))


@settings(max_examples=25, deadline=None)
@given(m=st.integers(1, 30), n=st.integers(1, 30), seed=st.integers(0, 2**32 - 1))
def test_svd_invariants(m, n, seed):
    a = rand(m, n, seed=seed)
    f = la.svd(a)
    p = min(m, n)
    assert f.u.shape == (m, p) and f.v.shape == (n, p)
    assert np.abs(f.u.T @ f.u - np.eye(p)).max() <= 1e-12
    assert np.abs(f.v.T @ f.v - np.eye(p)).max() <= 1e-12
    assert la.fro_norm((f.u * f.sigma) @ f.v.T - a) <= 1e-10 * la.fro_norm(a)
    assert np.all(np.diff(f.sigma) <= 0)
    assert np.allclose(f.sigma, np.linalg.svd(a, compute_uv=False), atol=1e-12 * la.fro_norm(a))


def test_svd_rank_deficient():
    u = rand(6, 2, seed=3)
    a = u @ u.T
    f = la.svd(a)
    assert np.abs(f.u.T @ f.u - np.eye(6)).max() <= 1e-12
    assert la.fro_norm((f.u * f.sigma) @ f.v.T - a) <= 1e-10 * la.fro_norm(a)
