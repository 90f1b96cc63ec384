import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bestapprox.errors import (DimensionMismatch, InvalidNorm, NonsmoothPoint, ZeroFunctional,
                               ZeroVector)
from bestapprox.norms import Norm, norm_eval, norm_gradient

POLY_F = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]])

ALL_KINDS = {
    "l1": Norm.lp(1),
    "l1.5": Norm.lp(1.5),
    "l2": Norm.lp(2),
    "l3": Norm.lp(3),
    "l4": Norm.lp(4),
    "sup": Norm.sup(),
    "weighted_l2": Norm.lp(2, weights=[1.0, 4.0, 0.5]),
    "weighted_sup": Norm.sup(weights=[2.0, 1.0, 0.25]),
    "polyhedral": Norm.polyhedral(POLY_F),
}


# -- documented examples ------------------------------------------------------


def test_eval_examples():
    assert norm_eval(Norm.lp(2), [3, 4]) == pytest.approx(5.0, abs=1e-15)
    assert norm_eval(Norm.lp(1), [1, -1, 1]) == 3.0
    assert norm_eval(Norm.sup(), [1, -2]) == 2.0


def test_gradient_examples():
    np.testing.assert_allclose(norm_gradient(Norm.lp(2), [3, 4]), [0.6, 0.8], atol=1e-15)
    with pytest.raises(NonsmoothPoint):
        norm_gradient(Norm.lp(1), [1, 0])


def test_lp4_gradient_against_central_differences():
    n4 = Norm.lp(4)
    v = np.array([1.0, 1.0])
    g = norm_gradient(n4, v)
    c = 2.0 ** -0.75
    for h in (1e-4, 1e-5, 1e-6, 1e-7):
        fd = [(n4(v + h * e) - n4(v - h * e)) / (2 * h) for e in np.eye(2)]
        np.testing.assert_allclose(fd, [c, c], atol=1e-7)
    np.testing.assert_allclose(g, [c, c], rtol=1e-14)


@pytest.mark.parametrize("p", [2, 4])
def test_finite_difference_error_slope(p):
    n = Norm.lp(p)
    v = np.array([0.7, -1.3, 0.4])
    g = n.gradient(v)
    hs = np.array([0.08, 0.04, 0.02, 0.01])
    errs = []
    for h in hs:
        fd = np.array([(n(v + h * e) - n(v - h * e)) / (2 * h) for e in np.eye(3)])
        errs.append(np.max(np.abs(fd - g)))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope >= 1.9


def test_gradient_errors():
    with pytest.raises(ZeroVector):
        Norm.lp(2).gradient([0, 0])
    with pytest.raises(NonsmoothPoint):
        Norm.sup().gradient([1, -1])
    with pytest.raises(NonsmoothPoint):
        Norm.polyhedral(POLY_F).gradient([1.0, 1.0, -1.0])  # |v1| = |v2| = |sum|


def test_kink_tolerance_is_relative():
    # 1e-11 relative to ||v|| = 1 is a kink; 1e-8 is not
    with pytest.raises(NonsmoothPoint):
        Norm.lp(1).gradient([1.0, 1e-11])
    np.testing.assert_allclose(Norm.lp(1).gradient([1.0, 1e-8]), [1.0, 1.0])


def test_invalid_norms():
    with pytest.raises(InvalidNorm):
        Norm.lp(0.5)
    with pytest.raises(InvalidNorm):
        Norm.lp(2, weights=[1.0, -1.0])
    with pytest.raises(InvalidNorm):
        Norm.polyhedral([[1.0, 1.0], [2.0, 2.0]])  # does not span
    with pytest.raises(DimensionMismatch):
        Norm.lp(2, weights=[1.0, 2.0])([1.0, 2.0, 3.0])


def test_spec_round_trip():
    for n in ALL_KINDS.values():
        assert Norm.from_spec(n.spec()) == n
    assert Norm.from_spec({"kind": "lp", "p": "inf"}) == Norm.sup()


# -- duality ------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(ALL_KINDS))
def test_dual_norm_matches_sampled_supremum(name, rng):
    norm = ALL_KINDS[name]
    for _ in range(5):
        f = rng.standard_normal(3)
        u = norm.dual_argmax(f)
        assert norm(u) == pytest.approx(1.0, abs=1e-12)
        assert f @ u == pytest.approx(norm.dual(f), rel=1e-9)
        # no sampled unit vector beats the dual norm
        Z = rng.standard_normal((4000, 3))
        Z /= np.asarray(norm(Z))[:, None]
        assert np.max(Z @ f) <= norm.dual(f) * (1 + 1e-12)


def test_dual_argmax_errors_and_ties():
    with pytest.raises(ZeroFunctional):
        Norm.lp(2).dual_argmax([0, 0])
    np.testing.assert_array_equal(Norm.lp(1).dual_argmax([1.0, 1.0]), [1.0, 0.0])


@pytest.mark.parametrize("name", sorted(ALL_KINDS))
def test_gradient_identities(name, rng):
    norm = ALL_KINDS[name]
    for _ in range(50):
        v = rng.standard_normal(3)
        try:
            g = norm.gradient(v)
        except NonsmoothPoint:
            continue
        assert g @ v == pytest.approx(norm(v), abs=1e-9)
        assert norm.dual(g) == pytest.approx(1.0, abs=1e-6)
        np.testing.assert_allclose(norm.gradient(3.7 * v), g, atol=1e-9)


def test_subgradient_at_kinks():
    np.testing.assert_array_equal(Norm.lp(1).subgradient([1.0, 0.0]), [1.0, 0.0])
    np.testing.assert_array_equal(Norm.sup().subgradient([1.0, -1.0]), [1.0, 0.0])
    np.testing.assert_array_equal(Norm.lp(2).subgradient([0.0, 0.0]), [0.0, 0.0])


# -- axioms -------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(ALL_KINDS))
def test_axioms_on_ten_thousand_samples(name):
    norm = ALL_KINDS[name]
    r = np.random.default_rng(99)
    n = 200 if name == "polyhedral" else 10_000
    X = r.standard_normal((n, 3)) * r.lognormal(0, 2, (n, 1))
    Y = r.standard_normal((n, 3)) * r.lognormal(0, 2, (n, 1))
    t = r.uniform(-50, 50, n)
    nx, ny = np.asarray(norm(X)), np.asarray(norm(Y))
    assert np.all(nx > 0)
    np.testing.assert_allclose(np.asarray(norm(X * t[:, None])), np.abs(t) * nx, rtol=1e-12)
    assert np.all(np.asarray(norm(X + Y)) <= (nx + ny) * (1 + 1e-12))
    assert norm(np.zeros(3)) == 0.0


finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
vec3 = arrays(np.float64, 3, elements=finite)


@settings(max_examples=300, deadline=None)
@given(x=vec3, y=vec3, t=finite, p=st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0, math.inf]))
def test_axioms_hypothesis(x, y, t, p):
    norm = Norm.lp(p)
    nx, ny = norm(x), norm(y)
    scale = 1e-12 * (nx + ny) + 1e-300
    assert norm(x + y) <= nx + ny + scale
    assert abs(norm(t * x) - abs(t) * nx) <= 1e-12 * abs(t) * nx + 1e-300
    assert (nx == 0.0) == (not np.any(x))


@settings(max_examples=200, deadline=None)
@given(v=vec3, p=st.sampled_from([1.5, 2.0, 3.0, 4.0]))
def test_gradient_pairing_hypothesis(v, p):
    norm = Norm.lp(p)
    if norm(v) < 1e-3:
        return
    g = norm.gradient(v)
    assert g @ v == pytest.approx(norm(v), rel=1e-9)
    assert norm.dual(g) == pytest.approx(1.0, abs=1e-6)
