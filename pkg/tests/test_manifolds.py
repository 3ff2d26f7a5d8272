import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyntriv import manifolds as mf
from dyntriv.errors import ShapeError, TangencyError

CATALOG = [
    mf.SpecialOrthogonal(4), mf.SpecialOrthogonal(2), mf.RealTorus(3), mf.Stiefel(5, 2),
    mf.Stiefel(4, 4), mf.Stiefel(6, 1), mf.Sphere(4), mf.Hyperbolic(3), mf.SymPosDef(4),
    mf.SpecialLinear(3), mf.GeneralLinearPlus(3),
]
IDS = [str(m) for m in CATALOG]


def test_dimensions():
    assert mf.SpecialOrthogonal(5).dim == 10
    assert mf.RealTorus(3).dim == 3 and mf.RealTorus(3).ambient_shape == (6, 6)
    assert mf.Stiefel(6, 2).dim == 6 * 2 - 3
    assert mf.Sphere(4).dim == 4 and mf.Hyperbolic(4).dim == 4
    assert mf.SymPosDef(3).dim == 6
    assert mf.SpecialLinear(3).dim == 8 and mf.GeneralLinearPlus(3).dim == 9
    with pytest.raises(ValueError):
        mf.Stiefel(2, 3)


def test_membership_examples():
    assert mf.membership(mf.SpecialOrthogonal(3), np.eye(3)) == 0.0
    assert mf.membership(mf.Sphere(2), np.array([0.6, 0.8, 0.0])) == pytest.approx(0.0, abs=1e-16)
    assert mf.membership(mf.SymPosDef(2), np.diag([1.0, -1.0])) == pytest.approx(1.0, abs=1e-15)
    assert mf.membership(mf.SpecialOrthogonal(2), np.diag([1.0, -1.0])) > 0.5
    assert mf.membership(mf.GeneralLinearPlus(2), np.diag([1.0, -1.0])) == 2.0
    assert mf.membership(mf.SpecialLinear(2), np.diag([2.0, 1.0])) == pytest.approx(1.0)
    x = np.zeros((3, 1))
    x[2] = 1.0
    assert mf.membership(mf.Hyperbolic(2), x) == 0.0
    assert mf.membership(mf.Hyperbolic(2), -x) > 0.0
    with pytest.raises(ShapeError):
        mf.membership(mf.SpecialOrthogonal(3), np.eye(2))


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_random_points_are_members(m):
    for seed in range(100):
        assert mf.membership(m, mf.random_point(m, seed).value) <= 1e-10


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_random_point_reproducible(m):
    a, b = mf.random_point(m, 123).value, mf.random_point(m, 123).value
    assert a.tobytes() == b.tobytes()


def test_so_sample_has_unit_det():
    for seed in range(20):
        q = mf.random_point(mf.SpecialOrthogonal(5), seed).value
        assert np.linalg.det(q) == pytest.approx(1.0, abs=1e-12)


def test_so2_chart_example():
    base = mf.make_point(mf.SpecialOrthogonal(2), np.eye(2))
    amb = mf.coords_to_ambient(mf.TangentCoords(base.manifold, base, np.array([0.7])))
    assert np.array_equal(amb, [[0.0, -0.7], [0.7, 0.0]])


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_chart_round_trip_and_tangency(m):
    rng = np.random.default_rng(5)
    base = mf.random_point(m, 9)
    z = mf.zero_coords(base)
    assert np.array_equal(mf.coords_to_ambient(z), np.zeros(m.ambient_shape))
    for _ in range(5):
        c = rng.standard_normal(m.dim)
        t = mf.TangentCoords(m, base, c)
        amb = mf.coords_to_ambient(t)
        back = mf.ambient_to_coords(m, base, amb).coords
        assert np.abs(back - c).max() <= 1e-12 * max(1.0, np.abs(c).max())
    # the chart is a linear bijection onto the tangent space
    assert np.linalg.matrix_rank(mf.chart_matrix(base)) == m.dim


@pytest.mark.parametrize("m", [mf.SpecialOrthogonal(3), mf.Stiefel(4, 2), mf.Sphere(3),
                               mf.Hyperbolic(3), mf.SymPosDef(3), mf.SpecialLinear(3)],
                         ids=str)
def test_non_tangent_rejected(m):
    base = mf.random_point(m, 2)
    # the base point itself is normal to the tangent space for these kinds
    bad = np.triu(np.ones(m.ambient_shape)) if m.kind == "spd" else base.value.copy()
    with pytest.raises(TangencyError):
        mf.ambient_to_coords(m, base, bad)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_chart_adjoint(n, seed):
    # algebra_grad_to_coords is the transpose of coords_to_algebra
    rng = np.random.default_rng(seed)
    for m in (mf.SpecialOrthogonal(n + 1), mf.SymPosDef(n), mf.SpecialLinear(n + 1),
              mf.Stiefel(n + 2, n), mf.RealTorus(n)):
        base = mf.random_point(m, rng)
        c = rng.standard_normal(m.dim)
        alg = mf.coords_to_algebra(base, c)
        h = rng.standard_normal(alg.shape)
        lhs = float(np.sum(h * alg))
        rhs = float(mf.algebra_grad_to_coords(base, h) @ c)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_hyperbolic_frame_is_lorentz_orthonormal():
    m = mf.Hyperbolic(4)
    for seed in range(10):
        p = mf.random_point(m, seed)
        u = p.frame
        gram = np.array([[mf.minkowski(u[:, [i]], u[:, [j]]) for j in range(4)] for i in range(4)])
        assert np.allclose(gram, np.eye(4), atol=1e-12)
        assert max(abs(mf.minkowski(u[:, [i]], p.value)) for i in range(4)) <= 1e-12


def test_make_point_validation():
    with pytest.raises(ShapeError):
        mf.make_point(mf.SpecialOrthogonal(3), np.eye(2))
    with pytest.raises(ValueError):
        mf.make_point(mf.Sphere(1), np.array([np.nan, 1.0]))
    with pytest.raises(ShapeError):
        mf.TangentCoords(mf.Sphere(2), mf.random_point(mf.Sphere(2), 0), np.zeros(3))
