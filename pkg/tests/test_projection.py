import numpy as np
import pytest
from scipy.optimize import linprog

from bestapprox.errors import PointInSet, UnsupportedVariant
from bestapprox.norms import Norm
from bestapprox.projection import (SolverConfig, approximative_compactness_probe,
                                   best_approximations, chebyshev_verdict, distance, grid_oracle,
                                   lipschitz_check, minimizing_sequence,
                                   projection_continuity_probe, truncation_family_verdict)
from bestapprox.sets import (FinitePointSet, NormBall, Polytope, SublevelSet, UnionOf,
                             curve_from_spec, truncated_l1_hull)
from bestapprox.solvers import min_norm_point, project_simplex

L1, L2, SUP = Norm.lp(1), Norm.lp(2), Norm.sup()
CIRCLE = curve_from_spec({"shape": "circle", "radius": 1.0})
TRIANGLE = Polytope([[0, 0], [3, 0], [1, 2]])


def point_segment_l2(x, a, b):
    x, a, b = (np.asarray(v, float) for v in (x, a, b))
    t = np.clip((x - a) @ (b - a) / ((b - a) @ (b - a)), 0, 1)
    return float(np.linalg.norm(x - a - t * (b - a)))


def l1_distance_linprog(x, V):
    # variables: lambda (m), s (n); minimize sum s with -s <= x - V^T lambda <= s
    m, n = V.shape
    c = np.concatenate([np.zeros(m), np.ones(n)])
    A = np.block([[-V.T, -np.eye(n)], [V.T, -np.eye(n)]])
    b = np.concatenate([-x, x])
    A_eq = np.concatenate([np.ones(m), np.zeros(n)])[None, :]
    res = linprog(c, A_ub=A, b_ub=b, A_eq=A_eq, b_eq=[1], bounds=(0, None), method="highs")
    return res.fun


# -- distance -----------------------------------------------------------------


def test_distance_examples():
    assert distance([2, 0], NormBall([0, 0], 1, L2), L2).distance == pytest.approx(1.0, abs=1e-12)
    r = distance(np.zeros(3), truncated_l1_hull(3), L1)
    assert r.distance == pytest.approx(4 / 3, abs=1e-12)
    np.testing.assert_allclose(r.minimizer, [0, 0, 4 / 3], atol=1e-12)
    seg = Polytope([[0, 0], [1, 0]])
    assert distance([2, 1], seg, L2).distance == pytest.approx(np.sqrt(2), abs=1e-12)


def test_l2_polytope_against_point_segment_formula(rng):
    for _ in range(30):
        a, b, x = rng.standard_normal((3, 2))
        got = distance(x, Polytope([a, b]), L2).distance
        assert got == pytest.approx(point_segment_l2(x, a, b), abs=1e-12)


def test_triangle_against_edges(rng):
    V = TRIANGLE.dense_vertices()
    for _ in range(30):
        x = rng.uniform(-3, 5, 2)
        if TRIANGLE.contains(x, 1e-9):
            continue
        ref = min(point_segment_l2(x, V[i], V[(i + 1) % 3]) for i in range(3))
        assert distance(x, TRIANGLE, L2).distance == pytest.approx(ref, abs=1e-10)


def test_truncated_hull_distances_are_analytic():
    # min over the simplex of sum lambda_k (k+1)/k is attained at the last vertex
    for n in (1, 2, 5, 64, 1024):
        d = distance(np.zeros(n), truncated_l1_hull(n), L1).distance
        assert d == pytest.approx((n + 1) / n, abs=1e-12)


def test_l1_polytope_against_dense_linprog(rng):
    for dim in (2, 3, 5):
        V = rng.standard_normal((7, dim))
        x = 3 * rng.standard_normal(dim)
        assert distance(x, Polytope(V), L1).distance == pytest.approx(l1_distance_linprog(x, V),
                                                                       abs=1e-9)


@pytest.mark.parametrize("method", ["exact", "frank_wolfe", "subgradient"])
@pytest.mark.parametrize("norm", [L1, L2, SUP, Norm.lp(3)], ids=["l1", "l2", "sup", "l3"])
def test_methods_agree(method, norm):
    x = np.array([4.0, 3.0])
    ref = distance(x, TRIANGLE, norm, SolverConfig(method="frank_wolfe", tolerance=1e-12)).distance
    try:
        got = distance(x, TRIANGLE, norm, SolverConfig(method=method))
    except UnsupportedVariant:
        assert method == "exact" and norm == Norm.lp(3)
        return
    assert got.distance == pytest.approx(ref, abs=1e-6)
    assert TRIANGLE.contains(got.minimizer, 1e-9)
    assert norm(x - got.minimizer) == pytest.approx(got.distance, abs=1e-12)


def test_other_variants():
    assert distance([3, 0], FinitePointSet([[0, 0], [1, 0]]), L2).distance == 2.0
    assert distance([0, 0], CIRCLE, L2).distance == pytest.approx(1.0, abs=1e-12)
    assert distance([2, 0], CIRCLE, L2).distance == pytest.approx(1.0, abs=1e-12)
    disk = SublevelSet(lambda y: np.sum(np.asarray(y) ** 2, axis=-1), 1.0, ([-2, -2], [2, 2]))
    assert distance([3, 4], disk, L2).distance == pytest.approx(4.0, abs=1e-6)
    U = UnionOf([FinitePointSet([[5, 0]]), NormBall([0, 0], 1, L2)])
    assert distance([4, 0], U, L2).distance == pytest.approx(1.0, abs=1e-12)
    assert distance([1.5, 0], U, L2).distance == pytest.approx(0.5, abs=1e-12)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tolerance=0)
    with pytest.raises(ValueError):
        SolverConfig(method="newton")
    with pytest.raises(UnsupportedVariant):
        distance([2, 0], CIRCLE, L2, SolverConfig(method="exact"))


def test_project_simplex_and_mnp(rng):
    for _ in range(10):
        v = rng.standard_normal(6)
        p = project_simplex(v)
        assert p.min() >= 0 and p.sum() == pytest.approx(1.0)
    z, lam, _, _ = min_norm_point(np.array([[1.0, 1.0], [1.0, -1.0]]))
    np.testing.assert_allclose(z, [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(lam, [0.5, 0.5], atol=1e-15)


# -- best approximations ------------------------------------------------------------


def test_circle_center_has_every_point():
    res = best_approximations([0, 0], CIRCLE, L2)
    assert res.cluster_diameter == pytest.approx(2.0, abs=1e-3)
    assert not res.singleton
    assert len(res.clusters) == 1


def test_sup_segment_flat_face():
    seg = Polytope([[-1, 1], [1, 1]])
    res = best_approximations([0, 3], seg, SUP)
    assert res.distance == pytest.approx(2.0, abs=1e-12)
    assert res.cluster_diameter == pytest.approx(2.0, abs=1e-3)


def test_unique_projection_invariants():
    res = best_approximations([4, 3], TRIANGLE, L2)
    assert res.singleton and len(res.minimizers) == 1
    assert res.cluster_diameter <= res.uniqueness_tolerance
    for y in res.minimizers:
        assert TRIANGLE.contains(y, 1e-9)
        assert L2(np.array([4, 3]) - y) <= res.distance + 1e-9


def test_two_point_set():
    res = best_approximations([0, 0], FinitePointSet([[-1, 0], [1, 0]]), L2)
    assert len(res.minimizers) == 2
    assert res.cluster_diameter == pytest.approx(2.0)


def test_eps_must_exceed_tolerance():
    with pytest.raises(ValueError):
        best_approximations([4, 3], TRIANGLE, L2, eps=1e-12)


# -- minimizing sequences ------------------------------------------------------------


def test_polytope_solver_iterates_converge():
    seq = minimizing_sequence([4, 3], TRIANGLE, L2, "SolverIterates", 32)
    assert seq.cauchy_tail_diameter < 1e-6
    assert len(seq.points) == 32
    assert seq.values[-1] == pytest.approx(seq.target, abs=1e-9)
    assert all(b <= a + 1e-12 for a, b in zip(seq.values, seq.values[1:]))


@pytest.mark.parametrize("strategy", ["RandomizedDescent", "Adversarial", "VertexSweep"])
def test_sequences_are_minimizing(strategy):
    x = [0.5, 3.0]  # nearest point of the triangle is the vertex (1, 2)
    seq = minimizing_sequence(x, TRIANGLE, L2, strategy, 32, seed=3)
    for p in seq.points:
        assert TRIANGLE.contains(p, 1e-9)
    assert seq.values[-1] == pytest.approx(seq.target, abs=1e-6)


def test_vertex_sweep_refuses_non_vertex_minimizer():
    with pytest.raises(UnsupportedVariant):
        minimizing_sequence([1.5, -1], TRIANGLE, L2, "VertexSweep")


def test_finite_set_sequence_is_constant():
    seq = minimizing_sequence([0.9, 0], FinitePointSet([[1, 0], [-1, 0]]), L2, "RandomizedDescent")
    assert seq.cauchy_tail_diameter == 0.0
    np.testing.assert_array_equal(seq.limit, [1, 0])


def test_flat_face_sequence_can_oscillate():
    seg = Polytope([[-1, 1], [1, 1]])
    seq = minimizing_sequence([0, 3], seg, SUP, "Adversarial", 64)
    assert seq.cauchy_tail_diameter >= 1.9
    assert seq.values[-1] == pytest.approx(2.0, abs=1e-6)


def test_sequence_errors():
    with pytest.raises(PointInSet):
        minimizing_sequence([1, 1], TRIANGLE, L2)
    with pytest.raises(ValueError):
        minimizing_sequence([4, 3], TRIANGLE, L2, "Zigzag")
    with pytest.raises(ValueError):
        minimizing_sequence([4, 3], TRIANGLE, L2, length=1)


# -- Chebyshev, truncation, grid -------------------------------------------------------------


def test_chebyshev_examples():
    poly = chebyshev_verdict(TRIANGLE, L2, [[4, 3], [-1, -1], [1, 5]])
    assert poly.verdict == "ChebyshevEvidence"
    circ = chebyshev_verdict(CIRCLE, L2, [[0, 0], [2, 0]])
    assert circ.verdict == "ProximinalNotUnique"
    np.testing.assert_array_equal(circ.witness, [0, 0])
    diag = Polytope([[1, 0], [0, 1]])
    assert chebyshev_verdict(diag, L1, [[0, 0]]).verdict == "ProximinalNotUnique"
    # the same segment from above its midpoint has a unique nearest point
    assert chebyshev_verdict(Polytope([[0, 0], [1, 0]]), L1, [[0.5, 1.0]]).verdict == "ChebyshevEvidence"


def test_chebyshev_needs_outside_probe():
    with pytest.raises(ValueError):
        chebyshev_verdict(TRIANGLE, L2, [[1, 1]])


def test_truncation_family_small():
    fam = [truncated_l1_hull(n) for n in (2, 4, 8)]
    res = truncation_family_verdict(lambda K: np.zeros(K.dim), fam, L1)
    assert res["verdict"] == "NotProximinalEvidence"
    np.testing.assert_allclose(res["distances"], [1.5, 1.25, 1.125], atol=1e-12)
    assert res["min_pairwise_gap"] > 2


def test_truncation_family_inconclusive_for_nested_balls():
    fam = [NormBall([0, 0], 1, L2)] * 3
    res = truncation_family_verdict(lambda K: np.array([3.0, 0.0]), fam, L2)
    assert res["verdict"] == "Inconclusive"


@pytest.mark.parametrize("K,x,norm", [
    (TRIANGLE, [4, 3], L2),
    (TRIANGLE, [4, 3], L1),
    (CIRCLE, [0.2, 0.1], SUP),
    (Polytope([[0, 0], [1, 0]]), [0.5, 1.0], L1),
])
def test_grid_oracle_agrees(K, x, norm):
    d_grid, step, p = grid_oracle(x, K, norm, cells=300)
    assert abs(d_grid - distance(x, K, norm).distance) <= 2 * step


def test_grid_oracle_needs_plane():
    with pytest.raises(UnsupportedVariant):
        grid_oracle(np.zeros(3), truncated_l1_hull(3), L1)


# -- continuity, compactness, Lipschitz ------------------------------------------------------


def test_continuity_on_convex_polytope():
    rep = projection_continuity_probe(TRIANGLE, L2, [4, 3], 0.5, count=24, seed=1)
    assert rep.center_singleton
    assert rep.modulus_estimate <= 1 + 1e-9
    assert rep.discontinuity_witness is None


def test_continuity_radius_sweep_stays_bounded():
    mods = [projection_continuity_probe(TRIANGLE, L2, [4, 3], r, 16, 2).modulus_estimate
            for r in (1.0, 0.3, 0.1, 0.03)]
    assert max(mods) <= 1 + 1e-9


def test_two_point_jump():
    K = FinitePointSet([[-1, 0], [1, 0]])
    rep = projection_continuity_probe(K, L2, [0.05, 1.0], 0.5, count=32, seed=0)
    w = rep.discontinuity_witness
    assert w is not None and w["jump"] == pytest.approx(2.0)
    assert w["a"][0] * w["b"][0] <= 0
    assert w["input_gap"] < 1e-6


def test_continuity_errors():
    with pytest.raises(PointInSet):
        projection_continuity_probe(TRIANGLE, L2, [1, 1], 0.1)
    with pytest.raises(ValueError):
        projection_continuity_probe(TRIANGLE, L2, [4, 3], 0.0)


def test_compactness_examples():
    x = np.array([4.0, 3.0])
    seqs = [minimizing_sequence(x, TRIANGLE, L2, s, 32, seed=1)
            for s in ("SolverIterates", "RandomizedDescent")]
    rep = approximative_compactness_probe(TRIANGLE, L2, x, seqs)
    assert rep.verdict == "SubsequenceConverges"
    assert all(p["limit_is_best_approximation"] for p in rep.per_sequence)

    fam = [truncated_l1_hull(2**k) for k in range(1, 8)]

    class Seq:  # best approximations of growing truncations, as one sequence in R^128
        strategy = "truncation"
        target = 1.0
        points = [np.pad(distance(np.zeros(K.dim), K, L1).minimizer, (0, 128 - K.dim)) for K in fam]

    rep = approximative_compactness_probe(truncated_l1_hull(128), L1, np.zeros(128), [Seq])
    assert rep.verdict == "FailureWitness"
    with pytest.raises(ValueError):
        approximative_compactness_probe(TRIANGLE, L2, x, [])


@pytest.mark.parametrize("K,norm", [(TRIANGLE, L2), (TRIANGLE, SUP), (CIRCLE, L1),
                                    (FinitePointSet([[0, 0], [2, 1]]), Norm.lp(3))])
def test_lipschitz_bound(K, norm):
    rep = lipschitz_check(K, norm, pair_count=100, seed=4)
    assert rep.passed and rep.max_ratio <= 1 + 1e-6
    assert rep.pairs + rep.skipped == 100
    assert rep.ray_max_ratio == pytest.approx(1.0, abs=1e-6)


def test_lipschitz_rejects_empty_budget():
    with pytest.raises(ValueError):
        lipschitz_check(TRIANGLE, L2, pair_count=0)
