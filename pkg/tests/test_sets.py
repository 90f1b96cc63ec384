import numpy as np
import pytest
from scipy.optimize import linprog

from bestapprox.errors import DimensionMismatch, InvalidSet, UnsupportedVariant
from bestapprox.norms import Norm
from bestapprox.sets import (FinitePointSet, NormBall, Polytope, SublevelSet, UnionOf,
                             contains, curve_from_spec, linear_minimization_oracle,
                             sample_boundary, set_from_spec, truncated_l1_hull)

TRIANGLE = Polytope([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def test_contains_examples():
    assert contains(NormBall([0, 0], 1, Norm.lp(2)), [0.5, 0])
    assert not contains(Polytope([[0, 0], [1, 0]]), [2, 0])
    assert contains(truncated_l1_hull(3), [0.0, 1.5, 0.0])
    assert not contains(truncated_l1_hull(3), [0.0, 1.0, 0.0])


def test_contains_tolerance():
    seg = Polytope([[0, 0], [1, 0]])
    assert not seg.contains([1.0 + 1e-7, 0.0])
    assert seg.contains([1.0 + 1e-7, 0.0], tol=1e-6)
    with pytest.raises(ValueError):
        seg.contains([0, 0], tol=-1)
    with pytest.raises(DimensionMismatch):
        seg.contains([0, 0, 0])


def test_lmo_examples():
    np.testing.assert_array_equal(linear_minimization_oracle(TRIANGLE, [1, 1]), [0, 0])
    ball = NormBall([0, 0], 1, Norm.lp(2))
    np.testing.assert_allclose(linear_minimization_oracle(ball, [1, 0]), [-1, 0])
    np.testing.assert_allclose(linear_minimization_oracle(truncated_l1_hull(3), [1, 1, 1]),
                               [0, 0, 4 / 3])


def test_lmo_tie_goes_to_lowest_index():
    np.testing.assert_array_equal(TRIANGLE.lmo([0.0, 0.0]), [0.0, 0.0])
    np.testing.assert_array_equal(TRIANGLE.lmo([-1.0, -1.0]), [1.0, 0.0])


def test_lmo_not_beaten_by_samples(rng):
    sets = [TRIANGLE, NormBall([1, -1], 2, Norm.lp(3)), NormBall([0, 0], 1, Norm.sup()),
            FinitePointSet([[0, 1], [2, 2], [-1, 0]])]
    for K in sets:
        members = np.array(K.sample_members(2000, rng))
        for _ in range(10):
            f = rng.standard_normal(2)
            assert f @ K.lmo(f) <= np.min(members @ f) + 1e-12


def test_polytope_lmo_matches_linprog(rng):
    V = rng.standard_normal((12, 3))
    K = Polytope(V)
    for _ in range(5):
        f = rng.standard_normal(3)
        res = linprog(V @ f, A_eq=np.ones((1, 12)), b_eq=[1], bounds=(0, None), method="highs")
        assert f @ K.lmo(f) == pytest.approx(res.fun, abs=1e-12)


def test_lmo_unsupported_for_curves():
    circle = curve_from_spec({"shape": "circle", "radius": 1.0})
    with pytest.raises(UnsupportedVariant):
        linear_minimization_oracle(circle, [1.0, 0.0])


def test_sample_boundary_circle():
    circle = curve_from_spec({"shape": "circle", "center": [1.0, 2.0], "radius": 3.0})
    pts = sample_boundary(circle, 4, seed=5)
    assert len(pts) == 4
    for p in pts:
        assert np.hypot(p[0] - 1, p[1] - 2) == pytest.approx(3.0, abs=1e-12)


def test_sample_boundary_polytope_lies_on_faces():
    square = Polytope([[0, 0], [1, 0], [1, 1], [0, 1]])
    for p in square.sample_boundary(50, seed=1):
        assert square.contains(p, 1e-12)
        assert min(p[0], p[1], 1 - p[0], 1 - p[1]) <= 1e-12


def test_sample_boundary_finite_set_repeats():
    K = FinitePointSet([[0, 0], [1, 1]])
    pts = K.sample_boundary(5, seed=3)
    assert len(pts) == 5
    assert {tuple(p) for p in pts} == {(0.0, 0.0), (1.0, 1.0)}


def test_sample_boundary_deterministic():
    ball = NormBall([0, 0, 0], 1, Norm.lp(1.5))
    a = ball.sample_boundary(7, seed=11)
    b = ball.sample_boundary(7, seed=11)
    np.testing.assert_array_equal(a, b)
    for p in a:
        assert Norm.lp(1.5)(p) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        ball.sample_boundary(0, seed=0)


def test_truncated_hull_vertices():
    K = truncated_l1_hull(5)
    norms = Norm.lp(1)(K.dense_vertices())
    np.testing.assert_allclose(norms, [(k + 1) / k for k in range(1, 6)])
    assert K.is_sparse and K.convex
    with pytest.raises(InvalidSet):
        truncated_l1_hull(0)


def test_set_from_spec_builders():
    specs = [
        {"type": "points", "points": [[0, 0], [1, 0]]},
        {"type": "polytope", "vertices": [[0, 0], [1, 0], [0, 1]]},
        {"type": "l1_hull", "n": 4},
        {"type": "ball", "center": [0, 0], "radius": 2, "norm": {"kind": "lp", "p": 3}},
        {"type": "curve", "shape": "ellipse", "axes": [2, 1]},
        {"type": "curve", "shape": "segment", "start": [0, 0], "end": [1, 1]},
        {"type": "sublevel", "function": "quadratic", "matrix": [[1, 0], [0, 2]],
         "center": [0, 0], "level": 1, "box": [[-2, -2], [2, 2]]},
        {"type": "union", "parts": [{"type": "points", "points": [[0, 0]]},
                                    {"type": "points", "points": [[3, 0]]}]},
    ]
    for spec in specs:
        K = set_from_spec(spec)
        assert K.spec()["type"] == spec["type"]
    assert isinstance(set_from_spec(specs[-1]), UnionOf)
    assert set_from_spec(specs[-1]).contains([3, 0])


def test_set_errors():
    with pytest.raises(InvalidSet):
        set_from_spec({"type": "torus"})
    with pytest.raises(InvalidSet):
        curve_from_spec({"shape": "spiral"})
    with pytest.raises(InvalidSet):
        Polytope(np.empty((0, 2)))
    with pytest.raises(InvalidSet):
        NormBall([0, 0], -1, Norm.lp(2))
    with pytest.raises(InvalidSet):
        FinitePointSet([[np.nan, 0]])
    with pytest.raises(InvalidSet):
        # concave function
        SublevelSet(lambda y: -np.sum(np.asarray(y) ** 2, axis=-1), 0.0, ([-1, -1], [1, 1]))


def test_sublevel_membership():
    K = set_from_spec({"type": "sublevel", "function": "norm", "norm": {"kind": "lp", "p": 1},
                       "center": [1, 1], "level": 1, "box": [[-1, -1], [3, 3]]})
    assert K.contains([1.5, 1.5])
    assert not K.contains([2.0, 2.0])
