"""Distance functions, best approximations and the diagnostics built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import solvers
from .errors import PointInSet, UnsupportedVariant
from .norms import as_vector
from .sets import FinitePointSet, NormBall, ParametricCurve, Polytope, SublevelSet, UnionOf

METHODS = ("auto", "exact", "frank_wolfe", "subgradient", "grid")
STRATEGIES = ("SolverIterates", "VertexSweep", "RandomizedDescent", "Adversarial")


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-10
    method: str = "auto"
    max_iter: int = 20000
    eps: float = 1e-9
    explore_directions: int = 8
    seed: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("solver tolerance must be > 0")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")


DEFAULT_CONFIG = SolverConfig()


@dataclass
class ApproxResult:
    distance: float
    minimizers: list
    cluster_diameter: float = 0.0
    iterations: int = 0
    residual: float | None = None
    attained: bool = True
    method: str = ""
    clusters: list = field(default_factory=list, repr=False)
    trace: list | None = field(default=None, repr=False)

    @property
    def uniqueness_tolerance(self):
        return 1e-4 * (1.0 + self.distance)

    @property
    def singleton(self):
        return self.cluster_diameter <= self.uniqueness_tolerance

    @property
    def minimizer(self):
        return self.minimizers[0]


# -- distance --------------------------------------------------------------


def _auto_method(K, norm):
    if isinstance(K, Polytope):
        if norm.polyhedral_type:
            return "segment" if K.n_vertices == 2 else "lp"
        if norm.euclidean_type:
            return "mnp"
        return "frank_wolfe"
    if isinstance(K, NormBall):
        if K.norm == norm:
            return "closed_form"
        if K.norm.polyhedral_type and norm.polyhedral_type:
            return "lp"
        return "frank_wolfe"
    if isinstance(K, FinitePointSet):
        return "enumeration"
    if isinstance(K, ParametricCurve):
        return "grid"
    if isinstance(K, SublevelSet):
        return "slsqp"
    raise UnsupportedVariant(f"no solver for {type(K).__name__}")


def _resolve_method(K, norm, method):
    if method == "auto":
        return _auto_method(K, norm)
    if method == "exact":
        m = _auto_method(K, norm)
        if m in ("lp", "segment", "mnp", "closed_form", "enumeration"):
            return m
        raise UnsupportedVariant(f"no exact route for {type(K).__name__} under {norm!r}")
    if method == "grid":
        if isinstance(K, (ParametricCurve, FinitePointSet)):
            return _auto_method(K, norm)
        raise UnsupportedVariant("grid route is for curves and finite sets")
    return method


def _run(x, K, norm, method, cfg, record=False, start=None):
    if method == "lp":
        return solvers.lp_distance(x, K, norm)
    if method == "segment":
        return solvers.segment_distance(x, K, norm)
    if method == "mnp":
        return solvers.mnp_distance(x, K, norm)
    if method == "closed_form":
        return solvers.ball_closed_form(x, K, norm)
    if method == "frank_wolfe":
        return solvers.frank_wolfe(x, K, norm, tol=cfg.tolerance, max_iter=cfg.max_iter,
                                   record=record, start=start)
    if method == "subgradient":
        return solvers.projected_subgradient(x, K, norm, tol=cfg.tolerance,
                                             max_iter=cfg.max_iter, record=record)
    if method == "enumeration":
        vals = np.asarray(norm(K.points - x))
        i = int(np.argmin(vals))
        return K.points[i].copy(), float(vals[i]), {"iterations": len(vals), "residual": 0.0,
                                                    "converged": True, "values": vals}
    if method == "grid":
        return solvers.curve_search(x, K, norm)
    if method == "slsqp":
        return solvers.sublevel_solve(x, K, norm, seed=cfg.seed)
    raise ValueError(f"unknown method {method!r}")


def distance(x, K, norm, cfg=DEFAULT_CONFIG, record=False):
    """d_K(x) together with one best approximation and solver diagnostics.

    ``attained`` is true when the method certifies its value to within the
    configured tolerance (or is exhaustive); when a budget runs out the best
    bound found is returned with ``attained=False``.
    """
    x = as_vector(x, K.dim)
    if isinstance(K, UnionOf):
        parts = [distance(x, P, norm, cfg, record) for P in K.parts]
        best = min(parts, key=lambda r: r.distance)
        return replace(best, iterations=sum(p.iterations for p in parts))
    method = _resolve_method(K, norm, cfg.method)
    y, value, info = _run(x, K, norm, method, cfg, record=record)
    converged = info.get("converged", True)
    resid = info.get("residual")
    attained = bool(converged and (resid is None or resid <= max(cfg.tolerance, 1e-9 * (1 + value))))
    return ApproxResult(distance=float(value), minimizers=[y], cluster_diameter=0.0,
                        iterations=int(info.get("iterations", 0)), residual=resid,
                        attained=attained, method=method, clusters=[[y]],
                        trace=info.get("trace"))


# -- best approximations -------------------------------------------------------


def max_pairwise(points, norm, cap=2048, chunk=256):
    """Largest pairwise distance; evenly subsamples beyond ``cap`` points."""
    P = np.asarray(points, dtype=float)
    if len(P) < 2:
        return 0.0
    if len(P) > cap:
        P = P[np.linspace(0, len(P) - 1, cap).astype(int)]
    best = 0.0
    for i in range(0, len(P), chunk):
        block = P[i:i + chunk]
        d = norm(block[:, None, :] - P[None, :, :])
        best = max(best, float(np.max(d)))
    return best


def single_linkage(points, radius, norm):
    """Connected components of the ``radius``-neighbourhood graph."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    P = np.asarray(points)
    for i in range(n):
        if i + 1 >= n:
            break
        d = np.atleast_1d(norm(P[i + 1:] - P[i]))
        for j in np.flatnonzero(d <= radius) + i + 1:
            ri, rj = find(i), find(int(j))
            if ri != rj:
                parent[rj] = ri
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _explore_directions(dim, count, seed):
    rng = np.random.default_rng(seed)
    eye = np.eye(dim)
    dirs = [d for pair in zip(eye, -eye) for d in pair]
    dirs += list(rng.standard_normal((count, dim)))
    return dirs


def _clusters(x, K, norm, eps, cfg, base):
    """Clusters (lists of points) of eps-minimizers for one non-union set."""
    d = base.distance
    level = d + eps
    if isinstance(K, FinitePointSet):
        vals = np.asarray(norm(K.points - x))
        pts = K.points[vals <= level]
        return [[pts[i] for i in grp] for grp in single_linkage(pts, 10 * eps, norm)]

    if isinstance(K, ParametricCurve):
        info = solvers.curve_search(x, K, norm)[2]
        t, P, vals = info["grid"]
        refined = info["refined"]
        idx = np.flatnonzero(vals <= level)
        clusters = []
        if idx.size:
            # consecutive grid indices are joined by the curve itself
            runs = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
            if K.closed and len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == len(t) - 1:
                runs[0] = np.concatenate([runs[-1], runs[0]])
                runs.pop()
            clusters = [[P[i] for i in run] for run in runs]
        for s, v in refined:
            if v <= level:
                clusters.append([K.points([s])[0]])
        # refined points sit within one grid step of the run they came from
        return _merge(clusters, info["slack"] + 10 * eps, norm)

    # convex variants: the eps-minimizer set is convex, hence one cluster
    pts = [base.minimizer]
    if isinstance(K, NormBall) and norm(x - K.center) <= cfg.tolerance:
        pts += K.sample_boundary(256, cfg.seed)
        eye = np.eye(K.dim)
        pts += [K.center + K.radius * e / K.norm(e) for e in np.vstack([eye, -eye])]
        return [[p for p in pts if norm(x - p) <= level]]
    dirs = _explore_directions(K.dim, cfg.explore_directions, cfg.seed)
    if norm.polyhedral_type and (isinstance(K, Polytope)
                                 or (isinstance(K, NormBall) and K.norm.polyhedral_type)):
        pts += solvers.lp_extremes(x, K, norm, level, dirs)
    elif isinstance(K, Polytope):
        dists = solvers.vertex_distances(K, x, norm)
        for start in np.argsort(dists, kind="stable")[:4]:
            y, v, _ = solvers.frank_wolfe(x, K, norm, tol=cfg.tolerance, max_iter=cfg.max_iter,
                                          start=int(start))
            pts.append(y)
    elif isinstance(K, SublevelSet):
        for s in range(3):
            y, v, _ = solvers.sublevel_solve(x, K, norm, seed=cfg.seed + 1 + s)
            pts.append(y)
    return [[p for p in pts if norm(x - p) <= level]]


def _merge(clusters, radius, norm):
    """Join clusters that come within ``radius`` of each other."""
    clusters = [np.asarray(c) for c in clusters if len(c)]
    parent = list(range(len(clusters)))

    def root(i):
        while parent[i] != i:
            i = parent[i]
        return i

    for i in range(len(clusters)):
        for j in range(i + 1, len(clusters)):
            if root(i) == root(j):
                continue
            A, B = clusters[i], clusters[j]
            if any(float(np.min(norm(A[k:k + 256, None, :] - B[None, :, :]))) <= radius
                   for k in range(0, len(A), 256)):
                parent[root(j)] = root(i)
    merged = {}
    for ci, c in enumerate(clusters):
        merged.setdefault(root(ci), []).extend(list(c))
    return list(merged.values())


def best_approximations(x, K, norm, eps=None, cfg=DEFAULT_CONFIG):
    """P_K(x) as clusters of eps-minimizers.

    Each cluster is a connected piece of ``{y in K : ||x - y|| <= d + eps}``
    as far as the solvers and samples can resolve it; ``minimizers`` holds
    one representative (the best point) per cluster and
    ``cluster_diameter`` is the largest distance between any two
    eps-minimizers found.
    """
    x = as_vector(x, K.dim)
    eps = cfg.eps if eps is None else float(eps)
    if not eps > cfg.tolerance:
        raise ValueError("eps must exceed the solver tolerance")
    base = distance(x, K, norm, cfg)
    parts = K.parts if isinstance(K, UnionOf) else [K]
    clusters = []
    for P in parts:
        pb = distance(x, P, norm, cfg) if len(parts) > 1 else base
        if pb.distance > base.distance + eps:
            continue
        pb = replace(pb, distance=base.distance) if len(parts) > 1 else pb
        clusters += _clusters(x, P, norm, eps, cfg, pb)
    clusters = _merge(clusters, 10 * eps, norm) if len(parts) > 1 else [c for c in clusters if c]
    if not clusters:
        clusters = [[base.minimizer]]
    reps = [min(c, key=lambda p: norm(x - p)) for c in clusters]
    order = np.argsort([norm(x - r) for r in reps], kind="stable")
    clusters = [clusters[i] for i in order]
    reps = [reps[i] for i in order]
    every = [p for c in clusters for p in c]
    diam = max_pairwise(every, norm)
    return replace(base, minimizers=reps, clusters=clusters, cluster_diameter=diam)


# -- minimizing sequences ---------------------------------------------------------


@dataclass
class MinimizingSequence:
    points: list
    values: list
    target: float
    cauchy_tail_diameter: float
    strategy: str = ""

    @property
    def limit(self):
        return self.points[-1]


def tail_diameter(points, norm):
    q = max(2, len(points) // 4)
    return max_pairwise(points[-q:], norm)


def _fit_length(points, length):
    points = list(points)[:length]
    while len(points) < length:
        points.append(points[-1].copy())
    return points


def _part_holding(K, y, norm):
    if not isinstance(K, UnionOf):
        return K
    return min(K.parts, key=lambda P: distance(y, P, norm).distance)


def _targets(d, length):
    r0 = 0.5 * (1.0 + d)
    r_end = 1e-12 * (1.0 + d)
    ratio = (r_end / r0) ** (1.0 / max(length - 1, 1))
    return [d + r0 * ratio**k for k in range(length)]


def _approach(x, norm, path, target):
    """Largest s in [0, 1] with ||x - path(s)|| <= target (bisection)."""
    if norm(x - path(1.0)) <= target:
        return path(1.0)
    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if norm(x - path(mid)) <= target:
            lo = mid
        else:
            hi = mid
    return path(lo)


def _path_factory(K, y_star, x, norm):
    """Map a member z of K to a path s -> K from the minimizer towards z."""
    if isinstance(K, ParametricCurve):
        t_star = solvers.curve_search(x, K, norm)[2]["refined"]
        t_star = min(t_star, key=lambda p: p[1])[0]

        def make(t_z):
            return lambda s: K.points([K.wrap(t_star + s * (t_z - t_star))])[0]

        return make
    if K.convex:
        return lambda z: (lambda s: y_star + s * (np.asarray(z) - y_star))
    raise UnsupportedVariant(f"no member paths for {type(K).__name__}")


def minimizing_sequence(x, K, norm, strategy="SolverIterates", length=64, seed=0,
                        cfg=DEFAULT_CONFIG):
    """A sequence (y_n) in K with ||x - y_n|| decreasing to d_K(x).

    SolverIterates   -- iterates of the distance solver (padded with its limit)
    VertexSweep      -- polytope vertices in order of decreasing distance
    RandomizedDescent -- points approaching the minimizer from random members
                        of K with distance targets shrinking geometrically
    Adversarial      -- like RandomizedDescent but alternating between
                        opposite extreme directions, to expose flat faces
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if length < 2:
        raise ValueError("length must be >= 2")
    x = as_vector(x, K.dim)
    base = best_approximations(x, K, norm, cfg=cfg)
    d = base.distance
    if d <= 10 * cfg.tolerance:
        raise PointInSet("x lies in K; minimizing sequences are trivial")
    rng = np.random.default_rng(seed)
    y_star = base.minimizer
    K_eff = _part_holding(K, y_star, norm)

    if isinstance(K_eff, FinitePointSet):
        points = [y_star.copy() for _ in range(length)]
    elif strategy == "SolverIterates":
        points = _solver_iterates(x, K_eff, norm, cfg, length)
    elif strategy == "VertexSweep":
        if not isinstance(K_eff, Polytope):
            raise UnsupportedVariant("VertexSweep needs a polytope")
        dist = solvers.vertex_distances(K_eff, x, norm)
        if float(dist.min()) > d + max(cfg.eps, 1e-9 * (1 + d)):
            raise UnsupportedVariant("no vertex is a best approximation; the sweep would not be minimizing")
        order = np.argsort(-dist, kind="stable")[-length:]
        points = _fit_length([K_eff.vertex(int(i)) for i in order], length)
    else:
        points = _random_sequence(x, K_eff, norm, base, strategy, length, rng)

    values = [float(norm(x - p)) for p in points]
    return MinimizingSequence(points, values, d, tail_diameter(points, norm), strategy)


def _solver_iterates(x, K, norm, cfg, length):
    if isinstance(K, (Polytope, NormBall)):
        _, _, info = solvers.frank_wolfe(x, K, norm, tol=cfg.tolerance, max_iter=cfg.max_iter,
                                         record=True)
        return _fit_length(info["trace"], length)
    if isinstance(K, ParametricCurve):
        pts = []
        for k in range(3, 13):
            t = K.param_grid(2**k)
            P = K.points(t)
            pts.append(P[int(np.argmin(norm(x - P)))])
        pts.append(solvers.curve_search(x, K, norm)[0])
        vals = [norm(x - p) for p in pts]
        # keep a running best so the values never increase
        mono = [pts[0]]
        for p, v in zip(pts[1:], vals[1:]):
            mono.append(p if v <= norm(x - mono[-1]) else mono[-1])
        return _fit_length(mono, length)
    if isinstance(K, SublevelSet):
        y, _, _ = solvers.sublevel_solve(x, K, norm, seed=cfg.seed)
        c = K.interior_point()
        path = lambda s: c + s * (y - c)  # noqa: E731
        return _fit_length([path(1 - 2.0**-k) for k in range(length - 1)] + [y], length)
    raise UnsupportedVariant(f"no solver iterates for {type(K).__name__}")


def _random_sequence(x, K, norm, base, strategy, length, rng):
    d = base.distance
    y_star = base.minimizer
    make = _path_factory(K, y_star, x, norm)
    targets = _targets(d, length)
    if strategy == "Adversarial":
        dirs = _adversarial_directions(K.dim, base, norm)
        if isinstance(K, ParametricCurve):
            # extreme eps-minimizers along each direction, reached along the curve
            grid_t = K.param_grid()
            P = K.points(grid_t)
            members = [grid_t[int(np.argmax(P @ g))] for g in dirs]
        elif isinstance(K, SublevelSet):
            samples = np.array(K.sample_boundary(256, int(rng.integers(2**63))))
            members = [samples[int(np.argmax(samples @ g))] for g in dirs]
        else:
            members = [K.lmo(-g) for g in dirs]
        picks = [members[k % len(members)] for k in range(length)]
    else:
        if isinstance(K, ParametricCurve):
            picks = list(rng.uniform(K.t_min, K.t_max, size=length))
        else:
            picks = K.sample_members(length, rng)
    points, prev = [], math.inf
    for z, tgt in zip(picks, targets):
        tgt = min(tgt, prev)
        p = _approach(x, norm, make(z), tgt)
        prev = norm(x - p)
        points.append(p)
    return points


def _adversarial_directions(dim, base, norm):
    dirs = []
    every = [p for c in base.clusters for p in c]
    if len(every) >= 2 and base.cluster_diameter > 0:
        P = np.asarray(every)
        i, j = np.unravel_index(np.argmax(norm(P[:, None, :] - P[None, :, :])), (len(P), len(P)))
        g = P[i] - P[j]
        if np.any(g):
            dirs += [g, -g]
    for e in np.eye(dim):
        dirs += [e, -e]
    return dirs


# -- Chebyshev classification -----------------------------------------------------


@dataclass
class ChebyshevReport:
    verdict: str  # ChebyshevEvidence | ProximinalNotUnique | NotProximinalEvidence
    sample_points: list
    per_point: list
    witness: np.ndarray | None = None
    gap_trend: list | None = None


def chebyshev_verdict(K, norm, probe_points, cfg=DEFAULT_CONFIG, eps=None):
    """Classify sampled points outside K by attainment and uniqueness."""
    probes = [as_vector(p, K.dim) for p in probe_points]
    probes = [p for p in probes if not K.contains(p, 1e-9)]
    if not probes:
        raise ValueError("no probe point lies outside K")
    per_point = []
    verdict, witness = "ChebyshevEvidence", None
    for p in probes:
        res = best_approximations(p, K, norm, eps=eps, cfg=cfg)
        per_point.append({"point": p, "distance": res.distance, "cluster_count": len(res.clusters),
                          "cluster_diameter": res.cluster_diameter, "attained": res.attained,
                          "singleton": res.singleton})
        if not res.attained and verdict != "NotProximinalEvidence":
            verdict, witness = "NotProximinalEvidence", p
        elif not res.singleton and verdict == "ChebyshevEvidence":
            verdict, witness = "ProximinalNotUnique", p
    return ChebyshevReport(verdict, probes, per_point, witness)


def truncation_family_verdict(x_of, family, norm, cfg=DEFAULT_CONFIG, gap_floor=1e-6):
    """Non-attainment evidence across a family K_1 ⊂ K_2 ⊂ ... of truncations.

    ``x_of(K)`` gives the base point in each member's ambient space.  The
    verdict is NotProximinalEvidence when distances strictly decrease along
    the family and the members' minimizers, embedded in the largest
    ambient space, stay pairwise separated by more than ``gap_floor``.
    """
    dists, mins = [], []
    for K in family:
        r = distance(x_of(K), K, norm, cfg)
        dists.append(r.distance)
        mins.append(r.minimizer)
    n = max(m.size for m in mins)
    emb = np.array([np.pad(m, (0, n - m.size)) for m in mins])
    gaps = [None] + [float(np.min(norm(emb[:i] - emb[i]))) for i in range(1, len(emb))]
    decreasing = all(b < a for a, b in zip(dists, dists[1:]))
    min_gap = min((g for g in gaps if g is not None), default=math.inf)
    if decreasing and min_gap > gap_floor:
        verdict = "NotProximinalEvidence"
    else:
        verdict = "Inconclusive"
    return {"verdict": verdict, "distances": dists, "minimizers": emb, "min_gaps": gaps,
            "strictly_decreasing": decreasing, "min_pairwise_gap": min_gap,
            "gap_trend": [a - b for a, b in zip(dists, dists[1:])]}


def truncation_family_sequence(x_of, family, norm, cfg=DEFAULT_CONFIG):
    """One sequence made of each member's best approximation, zero-padded to a common space."""
    info = truncation_family_verdict(x_of, family, norm, cfg)
    pts = list(info["minimizers"])
    n = pts[0].size
    x = np.pad(np.asarray(x_of(family[-1]), dtype=float), (0, n - family[-1].dim))
    values = [float(norm(x - p)) for p in pts]
    # the infimum over the whole family is approached, never attained
    target = float(min(values))
    return MinimizingSequence(pts, values, target, tail_diameter(pts, norm), "VertexSweep")


# -- brute-force oracle --------------------------------------------------------


def _near_mask(K, G, h):
    """Grid points within max-norm distance about h of K (vectorized)."""
    from scipy.spatial import ConvexHull, cKDTree

    if isinstance(K, UnionOf):
        return np.any([_near_mask(P, G, h) for P in K.parts], axis=0)
    if isinstance(K, FinitePointSet):
        d, _ = cKDTree(K.points).query(G, p=np.inf, distance_upper_bound=h * (1 + 1e-12))
        return d <= h
    if isinstance(K, Polytope):
        corners = np.array(np.meshgrid(*[[-h, h]] * K.dim)).reshape(K.dim, -1).T
        V = K.dense_vertices()
        hull = ConvexHull((V[:, None, :] + corners[None, :, :]).reshape(-1, K.dim))
        return np.all(G @ hull.equations[:, :-1].T + hull.equations[:, -1] <= 1e-12, axis=1)
    if isinstance(K, NormBall):
        return np.asarray(K.norm(G - K.center)) <= K.radius + h
    if isinstance(K, ParametricCurve):
        P = K.points(K.param_grid(16 * K.grid))
        d, _ = cKDTree(P).query(G, p=np.inf, distance_upper_bound=h * (1 + 1e-12))
        return d <= h
    if isinstance(K, SublevelSet):
        return np.array([K.function(g) <= K.level for g in G])
    raise UnsupportedVariant(f"no grid membership for {type(K).__name__}")


def grid_oracle(x, K, norm, cells=400):
    """Exhaustive search over a 2-D grid; returns (distance, step, best point).

    Grid points within max-norm distance h/2 of K stand in for K, so the
    result is within two grid steps (step = h max_i ||e_i||) of d_K(x).
    """
    x = as_vector(x, K.dim)
    if K.dim != 2:
        raise UnsupportedVariant("the grid oracle is two-dimensional")
    lo, hi = K.bounds()
    lo, hi = np.minimum(lo, x), np.maximum(hi, x)
    h = float(np.max(hi - lo)) / cells
    axes = [np.arange(lo[i] - 2 * h, hi[i] + 2 * h + h / 2, h) for i in range(2)]
    G = np.array(np.meshgrid(*axes, indexing="ij")).reshape(2, -1).T
    # every point of K has a grid point within h/2 in each coordinate
    mask = _near_mask(K, G, h / 2)
    if not np.any(mask):
        raise RuntimeError("grid too coarse: no grid point near K")
    vals = np.asarray(norm(G[mask] - x))
    k = int(np.argmin(vals))
    step = h * float(max(norm(np.eye(2))))
    return float(vals[k]), step, G[mask][k]


# -- continuity, compactness and Lipschitz probes ----------------------------------


@dataclass
class ContinuityReport:
    modulus_estimate: float | None
    center_singleton: bool
    discontinuity_witness: dict | None
    probe_count: int
    nonsingleton_probes: int = 0


def _proj(x, K, norm, cfg):
    r = best_approximations(x, K, norm, cfg=cfg)
    return r.minimizer, r.singleton


def projection_continuity_probe(K, norm, x, radius, count=64, seed=0, cfg=DEFAULT_CONFIG,
                                threshold=10.0, refine_steps=40):
    """Sample B[x; radius] and look for jumps of the metric projection.

    ``modulus_estimate`` is max ||P(x') - P(x)|| / ||x' - x|| (None when
    P(x) is not a singleton).  A pair of probes whose projection ratio
    exceeds ``threshold`` is bisected towards the jump, and reported with
    the final input gap and projection jump.
    """
    x = as_vector(x, K.dim)
    if not radius > 0:
        raise ValueError("radius must be > 0")
    if K.contains(x, 1e-12):
        raise PointInSet("x lies in K")
    rng = np.random.default_rng(seed)
    p0, single0 = _proj(x, K, norm, cfg)
    probes = []
    for _ in range(count):
        u = rng.standard_normal(K.dim)
        probes.append(x + radius * rng.random() ** (1.0 / K.dim) * u / norm(u))
    projs = [_proj(p, K, norm, cfg) for p in probes]
    modulus = None
    if single0:
        modulus = max(norm(q - p0) / norm(p - x) for p, (q, _) in zip(probes, projs))

    pts = [x] + probes
    pp = [p0] + [q for q, _ in projs]
    best, pair = 0.0, None
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            gap = norm(pts[i] - pts[j])
            if gap == 0:
                continue
            ratio = norm(pp[i] - pp[j]) / gap
            if ratio > best:
                best, pair = ratio, (i, j)
    witness = None
    if pair is not None and best > threshold:
        a, b = pts[pair[0]], pts[pair[1]]
        pa, pb = pp[pair[0]], pp[pair[1]]
        for _ in range(refine_steps):
            m = 0.5 * (a + b)
            pm, _ = _proj(m, K, norm, cfg)
            if norm(pa - pm) >= norm(pb - pm):
                b, pb = m, pm
            else:
                a, pa = m, pm
        witness = {"a": a, "b": b, "input_gap": float(norm(a - b)),
                   "jump": float(norm(pa - pb)), "projection_a": pa, "projection_b": pb}
    return ContinuityReport(modulus, single0, witness, count,
                            sum(1 for _, s in projs if not s))


@dataclass
class CompactnessReport:
    verdict: str  # SubsequenceConverges | FailureWitness
    per_sequence: list


def approximative_compactness_probe(K, norm, x, sequences, gap_floor=1e-3, conv_tol=1e-6):
    """Search each minimizing sequence's tail for a Cauchy subsequence.

    A sequence fails when every pair of tail points is at least
    ``gap_floor * (1 + target)`` apart.  Otherwise a greedy nested
    clustering extracts the subsequence, and its limit is checked against
    d_K(x): a norm limit of a minimizing sequence must be a best approximation.
    """
    if not sequences:
        raise ValueError("need at least one sequence")
    x = as_vector(x, K.dim)
    per = []
    for seq in sequences:
        pts = np.asarray(seq.points)
        tail_idx = np.arange(len(pts) // 2, len(pts))
        tail = pts[tail_idx]
        floor = gap_floor * (1.0 + seq.target)
        if len(tail) >= 2:
            D = np.asarray(norm(tail[:, None, :] - tail[None, :, :]))
            off = D[~np.eye(len(tail), dtype=bool)]
            min_gap = float(off.min())
        else:
            D = np.zeros((1, 1))
            min_gap = math.inf
        if min_gap > floor:
            per.append({"strategy": seq.strategy, "converges": False, "min_tail_gap": min_gap,
                        "subsequence": [], "limit": None, "limit_is_best_approximation": None})
            continue
        cand = list(range(len(tail)))
        rho = float(D.max()) if len(tail) > 1 else 0.0
        tol = conv_tol * (1.0 + seq.target)
        while rho > tol:
            counts = [(sum(1 for j in cand if D[i, j] <= rho / 2), -i) for i in cand]
            c, neg_i = max(counts)
            if c < 2:
                break
            cand = [j for j in cand if D[-neg_i, j] <= rho / 2]
            rho /= 2
        limit = tail[cand[-1]]
        limit_value = float(norm(x - limit))
        per.append({"strategy": seq.strategy, "converges": True, "min_tail_gap": min_gap,
                    "subsequence": [int(tail_idx[i]) for i in cand], "limit": limit,
                    "cluster_radius": rho,
                    "limit_is_best_approximation": abs(limit_value - seq.target) <= 1e-6 * (1 + seq.target)})
    ok = all(p["converges"] for p in per)
    return CompactnessReport("SubsequenceConverges" if ok else "FailureWitness", per)


@dataclass
class LipschitzReport:
    max_ratio: float
    bound: float
    pairs: int
    skipped: int
    ray_max_ratio: float | None
    ray_min_ratio: float | None
    worst_pair: tuple | None

    @property
    def passed(self):
        return self.max_ratio <= self.bound


def lipschitz_check(K, norm, pair_count=1000, seed=0, cfg=DEFAULT_CONFIG, margin=None):
    """Largest sampled |d_K(u) - d_K(v)| / ||u - v||.

    Half the pairs are random in an enlarged bounding box of K; the other
    half lie on a segment from a point towards its best approximation,
    where the ratio is exactly 1.
    """
    if pair_count < 1:
        raise ValueError("pair_count must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = K.bounds()
    span = float(np.max(hi - lo)) if np.size(lo) else 1.0
    margin = 0.5 * (1.0 + span) if margin is None else margin
    lo, hi = lo - margin, hi + margin
    dim = K.dim

    def d(p):
        return distance(p, K, norm, cfg)

    best, worst, skipped, min_sep = 0.0, None, 0, math.inf
    ray = []
    n_ray = pair_count // 2
    for k in range(pair_count):
        if k < pair_count - n_ray:
            u = rng.uniform(lo, hi)
            step = rng.standard_normal(dim)
            v = u + (0.05 + 0.95 * rng.random()) * span * step / norm(step)
            du, dv = d(u).distance, d(v).distance
        else:
            v = rng.uniform(lo, hi)
            rv = d(v)
            # points (numerically) inside K give degenerate rays
            if rv.distance <= 1e-6 * (1.0 + span):
                skipped += 1
                continue
            w = rv.minimizer
            u = w + (0.1 + 0.8 * rng.random()) * (v - w)
            dv, du = rv.distance, d(u).distance
        sep = norm(u - v)
        if sep == 0.0:
            skipped += 1
            continue
        ratio = abs(du - dv) / sep
        min_sep = min(min_sep, sep)
        if k >= pair_count - n_ray:
            ray.append(ratio)
        if ratio > best:
            best, worst = ratio, (u, v)
    bound = 1.0 + 2.0 * cfg.tolerance / min_sep if min_sep < math.inf else 1.0
    return LipschitzReport(best, bound, pair_count - skipped, skipped,
                           max(ray) if ray else None, min(ray) if ray else None, worst)
