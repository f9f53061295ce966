import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from greenfig.errors import DomainError, ValidationError
from greenfig.fields import (CONTINUOUS_ONLY, FIELDS_2D, FIELDS_3D, SMOOTH, ScalarField2,
                             VectorField2, catalog, const2, field_from_spec, grad,
                             parse_field_spec, radial, rot, weier2, weier3, weierstrass,
                             weierstrass_tail_bound)

STEP = 1e-4


def test_weierstrass_examples():
    # t = 0: every cosine is 1, so the partial sums approach 1 / (1 - a) = 2
    assert abs(weierstrass(0.5, 3, 60, 0.0) - 2.0) < 1e-15
    t = np.linspace(-3, 3, 101)
    np.testing.assert_allclose(weierstrass(0.5, 7, 0, t), np.cos(np.pi * t), atol=1e-15)
    # t = 1: 3^k is odd so every cos(3^k pi) = -1, and the sum is -(2 - 2^-30)
    assert abs(weierstrass(0.5, 3, 30, 1.0) + (2.0 - 2.0 ** -30)) <= 1e-15
    assert abs(weierstrass(0.5, 3, 30, 1.0) + 2.0) <= weierstrass_tail_bound(0.5, 30)


def test_weierstrass_parameter_domain():
    for a, b, K in [(0, 3, 5), (1, 3, 5), (0.5, 4, 5), (0.5, 1, 5), (0.5, 3, -1), (0.5, 3.5, 2)]:
        with pytest.raises(DomainError):
            weierstrass(a, b, K, 0.3)


@given(st.floats(-4, 4), st.floats(0.1, 0.9), st.sampled_from([3, 5, 7]), st.integers(0, 20))
def test_weierstrass_truncation_bound(t, a, b, K):
    gap = abs(weierstrass(a, b, K, t) - weierstrass(a, b, K + 10, t))
    assert gap <= weierstrass_tail_bound(a, K) + 1e-12


def test_default_truncation_is_below_1e9():
    assert weierstrass_tail_bound(0.5, 30) < 1e-9


def test_catalog_examples():
    P, Q = rot()(1.0, 0.0)
    assert (float(P), float(Q)) == (0.0, 0.5)
    x = np.linspace(-2, 2, 7)
    assert np.all(grad().curlz(x, x[::-1]) == 0)
    assert np.all(radial().divergence(x, x, x) == 1)
    names = set(catalog())
    assert {"const2", "rot", "grad", "weier", "const3", "radial", "weier3"} <= names


def test_smoothness_tags():
    assert rot().smoothness == SMOOTH
    assert weier2().smoothness == CONTINUOUS_ONLY and weier2().curlz is None
    assert weier3().smoothness == CONTINUOUS_ONLY and weier3().divergence is None
    rough = ScalarField2(lambda x, y: np.abs(x), "|x|", CONTINUOUS_ONLY)
    with pytest.raises(ValidationError):
        VectorField2(rough, rough, "bad", curlz=ScalarField2(lambda x, y: 0 * x, "0"))


def _points(n=1000, dim=2, seed=7):
    return np.random.default_rng(seed).uniform(-2, 2, size=(dim, n))


@pytest.mark.parametrize("name", [n for n, f in FIELDS_2D.items() if f().curlz is not None])
def test_curl_matches_central_differences(name):
    v = FIELDS_2D[name]()
    x, y = _points()
    dQdx = (v.Q(x + STEP, y) - v.Q(x - STEP, y)) / (2 * STEP)
    dPdy = (v.P(x, y + STEP) - v.P(x, y - STEP)) / (2 * STEP)
    assert np.max(np.abs(dQdx - dPdy - v.curlz(x, y))) <= 1e-5


@pytest.mark.parametrize("name", [n for n, f in FIELDS_3D.items() if f().divergence is not None])
def test_divergence_matches_central_differences(name):
    v = FIELDS_3D[name]()
    x, y, z = _points(dim=3)
    e = STEP
    div = ((v.component(0)(x + e, y, z) - v.component(0)(x - e, y, z))
           + (v.component(1)(x, y + e, z) - v.component(1)(x, y - e, z))
           + (v.component(2)(x, y, z + e) - v.component(2)(x, y, z - e))) / (2 * e)
    assert np.max(np.abs(div - v.divergence(x, y, z))) <= 1e-5


def test_weier_fields_are_what_they_claim():
    v = weier2()
    assert float(v.P(0.3, 1.0)) == pytest.approx(weierstrass(0.5, 3, 30, 1.0))
    assert float(v.Q(1.0, 0.3)) == pytest.approx(weierstrass(0.5, 3, 30, 1.0))
    w = weier3()
    # 2 + W >= 2 - sum a^k > 0, so the z-component has the sign of z
    x = np.linspace(-3, 3, 2001)
    assert np.all(w.component(2)(x, 0 * x, 1 + 0 * x) > 0)


def test_evaluators_broadcast():
    v = const2(1.5, -2.0)
    P, Q = v(np.zeros((3, 4)), 0.0)
    assert P.shape == Q.shape == (3, 4)
    assert np.all(P == 1.5) and np.all(Q == -2.0)


def test_field_specs():
    assert parse_field_spec("weier:a=0.5,b=3,K=30") == ("weier", {"a": 0.5, "b": 3, "K": 30})
    assert field_from_spec("const:c1=2,c2=3").name == "const2(c1=2.0,c2=3.0)"
    assert field_from_spec("radial", 3).name == "radial"
    with pytest.raises(ValidationError):
        field_from_spec("nope")
    with pytest.raises(ValidationError):
        field_from_spec("rot:speed=2")
    with pytest.raises(ValidationError):
        parse_field_spec("weier:a")
    with pytest.raises(ValidationError):
        parse_field_spec("weier:K=2.5")
    with pytest.raises(DomainError):
        field_from_spec("weier:b=4")


def test_fields_are_deterministic():
    x, y = _points(50)
    v = weier2()
    assert np.array_equal(v.P(x, y), v.P(x.copy(), y.copy()))
    assert math.isfinite(float(np.sum(v.Q(x, y))))
