"""Closed subsets K of R^n and the oracles the solvers need.

All sets are immutable after construction.  Membership tolerances are
measured in the max-coordinate norm, except for :class:`NormBall`, which
uses its own norm.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import sparse
from scipy.optimize import linprog, minimize, minimize_scalar

from .errors import DimensionMismatch, InvalidSet, UnsupportedVariant
from .norms import Norm, as_vector

CURVE_GRID = 4096


class ClosedSet:
    """Common interface; concrete variants override what they support."""

    dim: int

    def contains(self, v, tol=0.0):
        raise NotImplementedError

    def lmo(self, f):
        raise UnsupportedVariant(f"{type(self).__name__} has no linear minimization oracle")

    def sample_boundary(self, count, seed):
        raise UnsupportedVariant(f"{type(self).__name__} does not support boundary sampling")

    def sample_members(self, count, rng):
        return self.sample_boundary(count, int(rng.integers(2**63)))

    def bounds(self):
        raise NotImplementedError

    @property
    def convex(self):
        return False

    @property
    def bounded(self):
        return True

    def spec(self):
        return dict(self._spec)

    def _vec(self, v):
        return as_vector(v, self.dim)


def _check_tol(tol):
    if tol < 0:
        raise ValueError("tol must be >= 0")


class FinitePointSet(ClosedSet):
    def __init__(self, points, spec=None):
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.ndim != 2 or P.size == 0 or not np.all(np.isfinite(P)):
            raise InvalidSet("FinitePointSet needs a non-empty list of finite points")
        self.points = P
        self.dim = P.shape[1]
        self._spec = spec or {"type": "points", "points": P.tolist()}

    @property
    def convex(self):
        return len(np.unique(self.points, axis=0)) == 1

    def contains(self, v, tol=0.0):
        _check_tol(tol)
        v = self._vec(v)
        return bool(np.min(np.max(np.abs(self.points - v), axis=1)) <= tol)

    def lmo(self, f):
        return self.points[int(np.argmin(self.points @ as_vector(f, self.dim)))].copy()

    def sample_boundary(self, count, seed):
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        order = rng.permutation(len(self.points))
        reps = -(-count // len(order))
        return [self.points[i].copy() for i in np.tile(order, reps)[:count]]

    def sample_members(self, count, rng):
        return [self.points[i].copy() for i in rng.integers(len(self.points), size=count)]

    def bounds(self):
        return self.points.min(axis=0), self.points.max(axis=0)


class Polytope(ClosedSet):
    """Convex hull of finitely many vertices (rows of ``vertices``).

    ``vertices`` may be a dense array or a scipy sparse matrix; the sparse
    form keeps high-dimensional hulls with sparse vertices cheap.
    """

    def __init__(self, vertices, spec=None):
        if sparse.issparse(vertices):
            V = sparse.csr_matrix(vertices, dtype=float)
            finite = np.all(np.isfinite(V.data))
        else:
            V = np.atleast_2d(np.asarray(vertices, dtype=float))
            finite = np.all(np.isfinite(V))
        if V.ndim != 2 or V.shape[0] == 0 or V.shape[1] == 0 or not finite:
            raise InvalidSet("Polytope needs a non-empty list of finite vertices")
        self.vertices = V
        self.dim = V.shape[1]
        self.is_sparse = sparse.issparse(V)
        self._spec = spec or {"type": "polytope", "vertices": self.dense_vertices().tolist()}
        self._facets = None

    @property
    def convex(self):
        return True

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    def dense_vertices(self):
        return self.vertices.toarray() if self.is_sparse else self.vertices

    def vertex(self, i):
        if self.is_sparse:
            return self.vertices.getrow(i).toarray().ravel()
        return self.vertices[i].copy()

    def scores(self, f):
        """<f, v_i> for every vertex."""
        return np.asarray(self.vertices @ f).ravel()

    def combine(self, lam):
        return np.asarray(self.vertices.T @ lam).ravel()

    def contains(self, v, tol=0.0):
        _check_tol(tol)
        v = self._vec(v)
        m, n = self.vertices.shape
        Vt = self.vertices.T if not self.is_sparse else self.vertices.T.tocsr()
        ones = np.ones((1, m))
        if tol == 0.0:
            A_eq = sparse.vstack([Vt, ones]) if self.is_sparse else np.vstack([Vt, ones])
            res = linprog(np.zeros(m), A_eq=A_eq, b_eq=np.append(v, 1.0), bounds=(0, None),
                          method="highs", options={"primal_feasibility_tolerance": 1e-10})
        else:
            A_ub = sparse.vstack([Vt, -Vt]) if self.is_sparse else np.vstack([Vt, -Vt])
            res = linprog(np.zeros(m), A_ub=A_ub, b_ub=np.concatenate([v + tol, tol - v]),
                          A_eq=ones, b_eq=[1.0], bounds=(0, None), method="highs",
                          options={"primal_feasibility_tolerance": 1e-10})
        return res.status == 0

    def lmo(self, f):
        # np.argmin breaks ties by lowest index
        return self.vertex(int(np.argmin(self.scores(as_vector(f, self.dim)))))

    def _facet_list(self):
        if self._facets is None:
            self._facets = []
            if not self.is_sparse and 2 <= self.dim <= 3 and self.n_vertices > self.dim:
                from scipy.spatial import ConvexHull, QhullError

                try:
                    self._facets = [list(s) for s in ConvexHull(self.vertices).simplices]
                except (QhullError, ValueError):
                    self._facets = []
        return self._facets

    def sample_boundary(self, count, seed):
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        facets = self._facet_list()
        out = []
        for _ in range(count):
            if facets:
                idx = facets[int(rng.integers(len(facets)))]
            else:
                idx = rng.choice(self.n_vertices, size=min(2, self.n_vertices), replace=False)
            w = rng.dirichlet(np.ones(len(idx)))
            out.append(sum(wi * self.vertex(int(i)) for wi, i in zip(w, idx)))
        return out

    def sample_members(self, count, rng):
        m = self.n_vertices
        out = []
        for _ in range(count):
            k = min(m, 1 + int(rng.integers(min(m, self.dim + 1))))
            idx = rng.choice(m, size=k, replace=False)
            lam = np.zeros(m)
            lam[idx] = rng.dirichlet(np.ones(k))
            out.append(self.combine(lam))
        return out

    def bounds(self):
        if self.is_sparse:
            # sparse min/max account for the implicit zeros
            return (self.vertices.min(axis=0).toarray().ravel(),
                    self.vertices.max(axis=0).toarray().ravel())
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def truncated_l1_hull(n):
    """Hull of e_1..e_N in R^N where e_k has k-th entry (k+1)/k."""
    n = int(n)
    if n < 1:
        raise InvalidSet("truncation dimension must be positive")
    k = np.arange(1, n + 1, dtype=float)
    V = sparse.diags((k + 1) / k, format="csr")
    return Polytope(V, spec={"type": "l1_hull", "n": n})


class NormBall(ClosedSet):
    def __init__(self, center, radius, norm, spec=None):
        self.center = as_vector(center)
        self.dim = self.center.size
        if not (np.isfinite(radius) and radius > 0):
            raise InvalidSet("radius must be > 0")
        self.radius = float(radius)
        self.norm = norm
        if norm.dim is not None and norm.dim != self.dim:
            raise DimensionMismatch("ball norm and center dimensions differ")
        self._spec = spec or {"type": "ball", "center": self.center.tolist(),
                              "radius": self.radius, "norm": norm.spec()}

    @property
    def convex(self):
        return True

    def contains(self, v, tol=0.0):
        _check_tol(tol)
        v = self._vec(v)
        return bool(self.norm(v - self.center) <= self.radius + tol)

    def lmo(self, f):
        return self.center - self.radius * self.norm.dual_argmax(as_vector(f, self.dim))

    def sample_boundary(self, count, seed):
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(count):
            d = rng.standard_normal(self.dim)
            out.append(self.center + self.radius * d / self.norm(d))
        return out

    def sample_members(self, count, rng):
        out = []
        for _ in range(count):
            d = rng.standard_normal(self.dim)
            r = self.radius * rng.random() ** (1.0 / self.dim)
            out.append(self.center + r * d / self.norm(d))
        return out

    def bounds(self):
        # coordinate extent of a norm ball is radius * dual norm of e_i
        ext = np.array([self.radius * self.norm.dual(e) for e in np.eye(self.dim)])
        return self.center - ext, self.center + ext


class ParametricCurve(ClosedSet):
    """Image of a continuous map t -> R^n on [t_min, t_max].

    ``curve`` must accept a 1-D array of parameters and return an array of
    shape ``(len(t), n)``.
    """

    def __init__(self, curve, t_min, t_max, closed=False, spec=None, grid=CURVE_GRID):
        if not t_max > t_min:
            raise InvalidSet("empty parameter interval")
        self.curve = curve
        self.t_min = float(t_min)
        self.t_max = float(t_max)
        self.closed = bool(closed)
        self.grid = int(grid)
        pts = self.points(self.param_grid())
        if pts.ndim != 2 or not np.all(np.isfinite(pts)):
            raise InvalidSet("curve map must return finite (len(t), n) arrays")
        self.dim = pts.shape[1]
        self._spec = spec or {"type": "curve", "shape": "custom"}
        self._check_continuity()

    def points(self, t):
        return np.atleast_2d(np.asarray(self.curve(np.atleast_1d(np.asarray(t, dtype=float))), dtype=float))

    def param_grid(self, n=None):
        n = n or self.grid
        if self.closed:
            return np.linspace(self.t_min, self.t_max, n, endpoint=False)
        return np.linspace(self.t_min, self.t_max, n)

    def _check_continuity(self):
        steps = []
        for n in (self.grid // 4, self.grid // 2):
            P = self.points(self.param_grid(n))
            steps.append(np.max(np.abs(np.diff(P, axis=0))))
        if steps[1] > 0.75 * steps[0] + 1e-12:
            raise InvalidSet("curve map does not look continuous under refinement")

    def resolution(self):
        """Largest max-norm gap between consecutive grid samples."""
        P = self.points(self.param_grid())
        if self.closed:
            P = np.vstack([P, P[:1]])
        return float(np.max(np.abs(np.diff(P, axis=0))))

    def nearest_parameters(self, v, dist, slack):
        """Parameters of locally refined minimizers of ``dist(curve(t))``
        whose value is within ``slack`` of the grid minimum."""
        t = self.param_grid()
        vals = dist(self.points(t))
        h = t[1] - t[0]
        floor = np.min(vals)
        cands = np.flatnonzero(vals <= floor + slack)
        out = []
        for i in cands:
            lo, hi = t[i] - h, t[i] + h
            if not self.closed:
                lo, hi = max(lo, self.t_min), min(hi, self.t_max)
            res = minimize_scalar(lambda s: float(dist(self.points([s]))[0]), bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-13})
            s, val = float(res.x), float(res.fun)
            if vals[i] < val:
                s, val = float(t[i]), float(vals[i])
            out.append((s, val))
        return out

    def contains(self, v, tol=0.0):
        _check_tol(tol)
        v = self._vec(v)

        def dist(P):
            return np.max(np.abs(P - v), axis=1)

        best = min(val for _, val in self.nearest_parameters(v, dist, self.resolution()))
        return bool(best <= tol + 1e-12)

    def wrap(self, t):
        if self.closed:
            span = self.t_max - self.t_min
            return self.t_min + (t - self.t_min) % span
        return min(max(t, self.t_min), self.t_max)

    def sample_boundary(self, count, seed):
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        return list(self.points(rng.uniform(self.t_min, self.t_max, size=count)))

    def bounds(self):
        P = self.points(self.param_grid())
        r = self.resolution()
        return P.min(axis=0) - r, P.max(axis=0) + r


class SublevelSet(ClosedSet):
    """{y in box : g(y) <= level} for a convex function g.

    ``function`` maps an array of shape ``(..., n)`` to values of shape
    ``(...)``.  Convexity on the box is spot-checked by midpoint sampling.
    """

    def __init__(self, function, level, box, spec=None, seed=0):
        self.function = function
        self.level = float(level)
        if box is None:
            self.box = None
            self.dim = None
        else:
            lo, hi = (np.asarray(b, dtype=float) for b in box)
            if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi < lo):
                raise InvalidSet("box must be a pair of vectors with lo <= hi")
            self.box = (lo, hi)
            self.dim = lo.size
        self._spec = spec or {"type": "sublevel", "function": "custom", "level": self.level}
        self._center = None
        if self.box is not None:
            self._spot_check(seed)

    def _need_box(self):
        if self.box is None:
            raise InvalidSet("SublevelSet without a bounding box is unbounded for the solvers")

    def g(self, y):
        return float(self.function(np.asarray(y, dtype=float)))

    def _spot_check(self, seed):
        rng = np.random.default_rng(seed)
        lo, hi = self.box
        A = rng.uniform(lo, hi, size=(256, self.dim))
        B = rng.uniform(lo, hi, size=(256, self.dim))
        fa, fb = self.function(A), self.function(B)
        fm = self.function((A + B) / 2)
        scale = 1.0 + np.abs(fa) + np.abs(fb)
        if np.any(fm > (fa + fb) / 2 + 1e-9 * scale):
            raise InvalidSet("function is not midpoint convex on the box")
        if self.g(self.interior_point()) > self.level:
            raise InvalidSet("sublevel set is empty")

    def interior_point(self):
        """A minimizer of g over the box."""
        if self._center is None:
            self._need_box()
            lo, hi = self.box
            res = minimize(self.g, (lo + hi) / 2, method="L-BFGS-B", bounds=list(zip(lo, hi)),
                           options={"ftol": 1e-15, "gtol": 1e-12})
            self._center = np.clip(res.x, lo, hi)
        return self._center.copy()

    @property
    def convex(self):
        return True

    def contains(self, v, tol=0.0):
        _check_tol(tol)
        self._need_box()
        v = self._vec(v)
        lo, hi = self.box
        if tol == 0.0:
            return bool(np.all(v >= lo) and np.all(v <= hi) and self.g(v) <= self.level + 1e-12)
        blo, bhi = np.maximum(lo, v - tol), np.minimum(hi, v + tol)
        if np.any(blo > bhi):
            return False
        res = minimize(self.g, np.clip(v, blo, bhi), method="L-BFGS-B", bounds=list(zip(blo, bhi)))
        return bool(min(res.fun, self.g(np.clip(v, blo, bhi))) <= self.level + 1e-12)

    def _ray_exit(self, c, d):
        lo, hi = self.box
        with np.errstate(divide="ignore", invalid="ignore"):
            t_hi = np.where(d > 0, (hi - c) / d, np.where(d < 0, (lo - c) / d, np.inf))
        return float(np.min(t_hi))

    def sample_boundary(self, count, seed):
        if count < 1:
            raise ValueError("count must be >= 1")
        self._need_box()
        rng = np.random.default_rng(seed)
        c = self.interior_point()
        out = []
        for _ in range(count):
            d = rng.standard_normal(self.dim)
            t_box = self._ray_exit(c, d)
            if self.g(c + t_box * d) <= self.level:
                out.append(np.clip(c + t_box * d, *self.box))
                continue
            a, b = 0.0, t_box
            for _ in range(100):
                m = 0.5 * (a + b)
                if self.g(c + m * d) <= self.level:
                    a = m
                else:
                    b = m
            out.append(c + a * d)
        return out

    def sample_members(self, count, rng):
        c = self.interior_point()
        pts = self.sample_boundary(count, int(rng.integers(2**63)))
        return [c + rng.random() * (p - c) for p in pts]

    def bounds(self):
        self._need_box()
        return self.box[0].copy(), self.box[1].copy()


class UnionOf(ClosedSet):
    def __init__(self, parts, spec=None):
        parts = list(parts)
        if not parts:
            raise InvalidSet("UnionOf needs at least one part")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise DimensionMismatch("union parts live in different dimensions")
        self.parts = parts
        self.dim = dims.pop()
        self._spec = spec or {"type": "union", "parts": [p.spec() for p in parts]}

    @property
    def convex(self):
        return len(self.parts) == 1 and self.parts[0].convex

    def contains(self, v, tol=0.0):
        return any(p.contains(v, tol) for p in self.parts)

    def lmo(self, f):
        cands = [p.lmo(f) for p in self.parts]
        return cands[int(np.argmin([np.dot(f, c) for c in cands]))]

    def sample_boundary(self, count, seed):
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        per = [p.sample_boundary(count, int(rng.integers(2**63))) for p in self.parts]
        return [per[i % len(per)][i // len(per)] for i in range(count)]

    def sample_members(self, count, rng):
        per = [p.sample_members(count, rng) for p in self.parts]
        return [per[i % len(per)][i // len(per)] for i in range(count)]

    def bounds(self):
        bs = [p.bounds() for p in self.parts]
        return np.min([b[0] for b in bs], axis=0), np.max([b[1] for b in bs], axis=0)


# -- module-level operations --------------------------------------------


def contains(K, v, tol=0.0):
    return K.contains(v, tol)


def linear_minimization_oracle(K, f):
    """argmin over K of <f, y>; polytope ties go to the lowest vertex index."""
    if not isinstance(K, (FinitePointSet, Polytope, NormBall)):
        raise UnsupportedVariant(f"no linear minimization oracle for {type(K).__name__}")
    return K.lmo(f)


def sample_boundary(K, count, seed):
    return K.sample_boundary(count, seed)


# -- construction from plain specs ------------------------------------------


def _circle(center, radius):
    c = np.asarray(center, dtype=float)

    def curve(t):
        return c + radius * np.column_stack([np.cos(t), np.sin(t)])

    return curve


def _ellipse(center, axes, angle=0.0):
    c = np.asarray(center, dtype=float)
    a, b = axes
    R = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])

    def curve(t):
        return c + np.column_stack([a * np.cos(t), b * np.sin(t)]) @ R.T

    return curve


def _segment_curve(start, end):
    a, b = np.asarray(start, dtype=float), np.asarray(end, dtype=float)

    def curve(t):
        return a + np.outer(t, b - a)

    return curve


def curve_from_spec(spec):
    shape = spec.get("shape")
    if shape == "circle":
        center = spec.get("center", [0.0, 0.0])
        return ParametricCurve(_circle(center, float(spec.get("radius", 1.0))), 0.0, 2 * np.pi,
                               closed=True, spec=dict(spec))
    if shape == "ellipse":
        return ParametricCurve(_ellipse(spec.get("center", [0.0, 0.0]), spec["axes"],
                                        float(spec.get("angle", 0.0))),
                               0.0, 2 * np.pi, closed=True, spec=dict(spec))
    if shape == "arc":
        center = spec.get("center", [0.0, 0.0])
        return ParametricCurve(_circle(center, float(spec.get("radius", 1.0))),
                               float(spec["start"]), float(spec["stop"]), closed=False,
                               spec=dict(spec))
    if shape == "segment":
        return ParametricCurve(_segment_curve(spec["start"], spec["end"]), 0.0, 1.0,
                               closed=False, spec=dict(spec))
    raise InvalidSet(f"unknown curve shape {shape!r}")


def _quadratic(matrix, center):
    A = np.asarray(matrix, dtype=float)
    c = np.asarray(center, dtype=float)

    def g(y):
        d = np.asarray(y, dtype=float) - c
        return np.einsum("...i,ij,...j->...", d, A, d)

    return g


def sublevel_from_spec(spec):
    fn = spec.get("function")
    box = spec.get("box")
    if fn == "quadratic":
        g = _quadratic(spec["matrix"], spec["center"])
    elif fn == "norm":
        norm = Norm.from_spec(spec["norm"])
        c = np.asarray(spec.get("center"), dtype=float)

        def g(y):
            return norm(np.asarray(y, dtype=float) - c)
    else:
        raise InvalidSet(f"unknown sublevel function {fn!r}")
    return SublevelSet(g, spec["level"], box, spec=dict(spec))


def set_from_spec(spec):
    """Build a ClosedSet from a plain mapping (the scenario file format)."""
    kind = spec.get("type")
    if kind == "points":
        return FinitePointSet(spec["points"], spec=dict(spec))
    if kind == "polytope":
        return Polytope(spec["vertices"], spec=dict(spec))
    if kind == "l1_hull":
        return truncated_l1_hull(spec["n"])
    if kind == "ball":
        return NormBall(spec["center"], spec["radius"], Norm.from_spec(spec["norm"]), spec=dict(spec))
    if kind == "curve":
        return curve_from_spec(spec)
    if kind == "sublevel":
        return sublevel_from_spec(spec)
    if kind == "union":
        return UnionOf([set_from_spec(p) for p in spec["parts"]], spec=dict(spec))
    raise InvalidSet(f"unknown set type {kind!r}")
