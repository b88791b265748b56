import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from thimc import lorentz as lz
from thimc.errors import InvariantError

finite = st.floats(-3, 3, allow_nan=False)
vec3 = arrays(float, 3, elements=finite)
vec4 = arrays(float, 4, elements=finite)


def sl2r(p):
    """SL2R element from three bounded parameters (product of elementary factors)."""
    a, b, c = p
    return (np.array([[1.0, a], [0.0, 1.0]]) @ np.array([[1.0, 0.0], [b, 1.0]])
            @ np.diag([np.exp(c / 3), np.exp(-c / 3)]))


def sl2c(p):
    z = sl2r(p[:3]).astype(complex)
    return z @ np.array([[np.exp(1j * p[3]), 0], [0, np.exp(-1j * p[3])]])


def test_embed_e31_values():
    assert np.array_equal(lz.embed_e31([0, 0, 0]), np.zeros((2, 2)))
    assert np.array_equal(lz.embed_e31([1, 0, 0]), [[0, -1], [1, 0]])
    assert np.allclose(lz.extract_e31(lz.embed_e31([3, -2, 5])), [3, -2, 5])


def test_scalar_m2r_basis():
    assert lz.scalar_m2r(lz.BASIS_I, lz.BASIS_I) == -1
    assert lz.scalar_m2r(lz.BASIS_J, lz.BASIS_J) == 1
    assert lz.scalar_m2r(lz.BASIS_K, lz.BASIS_K) == 1
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert lz.scalar_m2r(X, X) == pytest.approx(2.0)


def test_scalar_herm_values():
    assert lz.scalar_herm(lz.I_PRIME, lz.I_PRIME) == pytest.approx(1.0)
    assert lz.scalar_herm(np.eye(2), np.eye(2)) == pytest.approx(-1.0)
    with pytest.raises(InvariantError):
        lz.scalar_herm(np.array([[0, 1], [0, 0]]), np.eye(2))


@given(vec4)
def test_scalar_herm_is_minus_det(p):
    X = lz.embed_herm(p)
    assert lz.scalar_herm(X, X) == pytest.approx(-lz.det2(X).real, abs=1e-9)
    assert np.allclose(lz.extract_herm(X), p)


@given(vec3)
def test_e31_coordinates_are_isometric(p):
    X = lz.embed_e31(p)
    assert lz.scalar_m2r(X, X) == pytest.approx(lz.inner(p, p, "E31"), abs=1e-9)


@given(vec3, vec3, vec3)
def test_ad_action_invariance(a, x, y):
    g = sl2r(a)
    X, Y = lz.embed_e31(x), lz.embed_e31(y)
    AX, AY = lz.ad_action(g, X), lz.ad_action(g, Y)
    assert lz.trace2(AX) == pytest.approx(0.0, abs=1e-8)
    assert lz.scalar_m2r(AX, AY) == pytest.approx(lz.scalar_m2r(X, Y), rel=1e-7, abs=1e-7)
    assert np.allclose(lz.ad_action(np.eye(2), X), X)


@given(vec3, vec3, vec3)
def test_proj_h_properties(a, b, c):
    g1, g2, h = sl2r(a), sl2r(b), sl2r(c)
    assert np.allclose(lz.proj_h(g1, g1), np.eye(2))
    assert lz.det2(lz.proj_h(g1, g2)) == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(lz.proj_h(g1 @ h, g2 @ h), lz.proj_h(g1, g2), atol=1e-7)


@given(vec4, vec3)
def test_proj_s_properties(p, r):
    g = sl2c(p)
    X = lz.proj_s(g)
    assert np.allclose(lz.proj_s(np.eye(2)), lz.I_PRIME)
    assert lz.det2(X).real == pytest.approx(-1.0, abs=1e-8)
    assert lz.is_hermitian(X, 1e-9)
    assert np.allclose(lz.proj_s(g @ sl2r(r)), X, atol=1e-7)


def test_check_sl2_rejects_drift():
    with pytest.raises(InvariantError):
        lz.check_sl2(np.diag([2.0, 1.0]))
    with pytest.raises(InvariantError):
        lz.proj_h(np.diag([2.0, 1.0]), np.eye(2))


def test_renormalize_and_compose(rng):
    g = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert lz.det2(lz.renormalize(g)) == pytest.approx(1.0)
    steps = [sl2r(rng.uniform(-0.1, 0.1, 3)) for _ in range(100)]
    prod = lz.compose(steps)
    ref = np.linalg.multi_dot(steps)
    assert np.allclose(prod, ref, rtol=1e-10)
    with pytest.raises(InvariantError):
        lz.renormalize(np.diag([-1.0, 1.0]))


@settings(max_examples=30)
@given(vec4)
def test_coordinate_round_trips(p):
    for amb in ("H31", "S31"):
        assert np.allclose(lz.coords(lz.from_coords(p, amb), amb), p)
    X = lz.embed_m2r(p)
    assert lz.scalar_m2r(X, X) == pytest.approx(lz.inner(p, p, "H31"), abs=1e-8)
