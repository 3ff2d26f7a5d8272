import math

import mpmath
import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from dyntriv import matexp as mx
from dyntriv.densela import fro_inner, fro_norm, lu_solve, qr_thin
from dyntriv.errors import ShapeError, StructureError


def rand(n, seed, scale=1.0):
    return scale * np.random.default_rng(seed).standard_normal((n, n))


def random_so(n, seed):
    q = qr_thin(rand(n, seed)).q
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def test_expm_examples():
    assert np.array_equal(mx.expm(np.zeros((3, 3))), np.eye(3))
    for th in (0.3, math.pi / 2, 2.0):
        r = mx.expm(np.array([[0.0, -th], [th, 0.0]]))
        assert np.allclose(r, [[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]], atol=1e-15)
    assert np.allclose(mx.expm(np.array([[0.0, 1.0], [0.0, 0.0]])), [[1.0, 1.0], [0.0, 1.0]], atol=0)
    with pytest.raises(ShapeError):
        mx.expm(np.zeros((2, 3)))


def test_expm_report_parameters():
    rep = mx.expm_report(np.zeros((2, 2)))
    assert rep.squarings == 0 and rep.pade_degree == 3
    rep = mx.expm_report(rand(5, 0, 20.0))
    assert rep.pade_degree == 13 and rep.squarings > 0


def mp_expm(a):
    with mpmath.workdps(40):
        return np.array(mpmath.expm(mpmath.matrix(a.tolist())).tolist(), dtype=np.float64)


def expm_condition(a):
    # relative condition number from the Frechet derivative on unit directions
    n = a.shape[0]
    worst = 0.0
    for idx in np.ndindex(n, n):
        e = np.zeros((n, n))
        e[idx] = 1.0
        worst = max(worst, fro_norm(mx.dexpm(a, e)))
    return worst * fro_norm(a) / fro_norm(mx.expm(a))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1), scale=st.sampled_from([1e-3, 0.1, 1.0, 5.0, 15.0]))
def test_expm_matches_high_precision(n, seed, scale):
    a = rand(n, seed, scale / math.sqrt(n))
    ref = mp_expm(a)
    err = fro_norm(mx.expm(a) - ref) / fro_norm(ref)
    assert err <= 1e-13 * max(1.0, expm_condition(a))
    # scipy agrees more loosely; it can lose digits on non-normal input
    assert fro_norm(sla.expm(a) - ref) <= 1e-9 * fro_norm(ref)


def test_expm_non_normal_case():
    a = np.array([[15.96351233, -15.92357244], [2.25487703, 12.62629224]])
    ref = mp_expm(a)
    assert fro_norm(mx.expm(a) - ref) <= 1e-14 * fro_norm(ref)


def test_expm_inverse_and_det():
    a = rand(6, 4)
    ea = mx.expm(a)
    assert np.allclose(ea @ mx.expm(-a), np.eye(6), atol=1e-12)
    assert np.linalg.det(ea) == pytest.approx(math.exp(np.trace(a)), rel=1e-12)


@pytest.mark.parametrize("method", ["block", "coupled"])
def test_dexpm_examples(method):
    e = rand(4, 1)
    assert np.allclose(mx.dexpm(np.zeros((4, 4)), e, method), e, atol=1e-15)
    a = rand(4, 2)
    assert np.array_equal(mx.dexpm(a, np.zeros((4, 4)), method), np.zeros((4, 4)))
    # commuting direction: L(A, E) = e^A E
    comm = 0.3 * a @ a - 0.5 * a
    assert np.allclose(mx.dexpm(a, comm, method), mx.expm(a) @ comm, rtol=1e-12, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 2**32 - 1))
def test_dexpm_vs_scipy_and_between_methods(n, seed):
    a, e = rand(n, seed), rand(n, seed + 1)
    ref = sla.expm_frechet(a, e, compute_expm=False)
    blk = mx.dexpm(a, e)
    cpl = mx.dexpm(a, e, "coupled")
    assert fro_norm(blk - ref) <= 1e-12 * fro_norm(ref)
    assert fro_norm(cpl - ref) <= 1e-12 * fro_norm(ref)
    ex, _ = mx.expm_frechet_coupled(a, e)
    assert fro_norm(ex - sla.expm(a)) <= 1e-12 * fro_norm(ex)


def test_dexpm_large_norm():
    a = rand(6, 9, 100.0 / 6)
    e = rand(6, 10)
    ref = sla.expm_frechet(a, e, compute_expm=False)
    for method in ("block", "coupled"):
        assert fro_norm(mx.dexpm(a, e, method) - ref) <= 1e-10 * fro_norm(ref)


def test_dexpm_vs_central_differences():
    h = 1e-5
    a, e = rand(5, 11, 0.5), rand(5, 12)
    fd = (mx.expm(a + h * e) - mx.expm(a - h * e)) / (2 * h)
    assert fro_norm(mx.dexpm(a, e) - fd) <= 1e-8 * fro_norm(fd)


def test_expm_grad_examples():
    g = rand(3, 5)
    assert np.allclose(mx.expm_grad(np.zeros((3, 3)), g), g, atol=1e-15)
    assert np.array_equal(mx.expm_grad(rand(3, 6), np.zeros((3, 3))), np.zeros((3, 3)))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_expm_grad_adjoint(n, seed):
    a, g, e = rand(n, seed), rand(n, seed + 1), rand(n, seed + 2)
    lhs = fro_inner(mx.expm_grad(a, g), e)
    rhs = fro_inner(g, mx.dexpm(a, e))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs), abs(rhs))


def test_expm_grad_finite_differences():
    h = 1e-6
    a, c = rand(4, 21, 0.7), rand(4, 22)
    grad = mx.expm_grad(a, c)
    for seed in range(5):
        e = rand(4, 30 + seed)
        fd = (fro_inner(c, mx.expm(a + h * e)) - fro_inner(c, mx.expm(a - h * e))) / (2 * h)
        assert fro_inner(grad, e) == pytest.approx(fd, rel=1e-7, abs=1e-9)


def test_lie_exp_grad():
    b, a, g = random_so(4, 1), rand(4, 2), rand(4, 3)
    a = a - a.T
    assert np.allclose(mx.lie_exp_grad(np.eye(4), a, g), mx.expm_grad(a, g), atol=1e-14)
    assert np.array_equal(mx.lie_exp_grad(b, a, np.zeros((4, 4))), np.zeros((4, 4)))

    def f(y):
        return fro_inner(g, b @ mx.expm(lu_solve(b, y)))

    grad = mx.lie_exp_grad(b, a, g)
    h = 1e-6
    for seed in range(5):
        e = rand(4, 40 + seed)
        fd = (f(a + h * e) - f(a - h * e)) / (2 * h)
        assert fro_inner(grad, e) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_lie_exp_grad_left_invariant_adjoint():
    rng = np.random.default_rng(7)
    for n in range(1, 7):
        b = rng.standard_normal((n, n)) + n * np.eye(n)
        a, g, e = rng.standard_normal((3, n, n))
        assert np.allclose(mx.lie_exp_grad_left_invariant(np.eye(n), a, g), mx.expm_grad(a, g), atol=1e-13)
        assert np.array_equal(mx.lie_exp_grad_left_invariant(b, a, np.zeros((n, n))), np.zeros((n, n)))

        def inner(x, y):
            return fro_inner(lu_solve(b, x), lu_solve(b, y))

        forward = b @ mx.dexpm(lu_solve(b, a), lu_solve(b, e))
        lhs = inner(mx.lie_exp_grad_left_invariant(b, a, g), e)
        rhs = inner(g, forward)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_injectivity_check():
    assert mx.lie_injectivity_check(np.zeros((3, 3)))
    inside = math.pi - 0.1
    outside = math.pi + 0.1
    assert mx.lie_injectivity_check(np.array([[0.0, -inside], [inside, 0.0]]))
    assert not mx.lie_injectivity_check(np.array([[0.0, -outside], [outside, 0.0]]))
    s = rand(4, 8)
    assert mx.lie_injectivity_check(100.0 * (s + s.T))
    with pytest.raises(StructureError):
        mx.lie_injectivity_check(np.array([[1.0, 2.0], [0.0, 1.0]]))
