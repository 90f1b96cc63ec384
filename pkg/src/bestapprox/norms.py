"""Norms on R^n: evaluation, dual norms and Gateaux derivatives.

A :class:`Norm` is an immutable description of one of

* ``lp``   -- weighted or plain l^p, ``1 <= p < inf``: (sum w_i |v_i|^p)^(1/p)
* ``sup``  -- weighted or plain max norm: max w_i |v_i|
* ``polyhedral`` -- max_i |<f_i, v>| for a spanning family of functionals f_i

Vectors are plain 1-D numpy arrays; evaluation also accepts stacks of
vectors along the leading axes.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog

from .errors import DimensionMismatch, InvalidNorm, NonsmoothPoint, ZeroFunctional, ZeroVector

# relative distance to the degeneracy set below which an l1/sup/polyhedral
# point counts as a kink
KINK_TOL = 1e-10


def as_vector(v, dim=None):
    """Return ``v`` as a finite float64 1-D array, checking its length."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatch(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    if dim is not None and arr.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {arr.size}")
    return arr


def pairing(f, v):
    """Duality pairing <f, v> (coordinate dot product)."""
    return float(np.dot(np.asarray(f, dtype=float), np.asarray(v, dtype=float)))


class Norm:
    """A computable norm on R^n with smoothness metadata."""

    __slots__ = ("kind", "p", "weights", "functionals", "_scale")

    def __init__(self, kind, p=2.0, weights=None, functionals=None):
        if kind not in ("lp", "sup", "polyhedral"):
            raise InvalidNorm(f"unknown norm kind {kind!r}")
        self.kind = kind
        self.p = float(p) if kind == "lp" else (math.inf if kind == "sup" else None)
        self.weights = None
        self.functionals = None
        self._scale = None
        if kind == "lp" and not self.p >= 1.0:
            raise InvalidNorm(f"p must be >= 1, got {p}")
        if kind == "lp" and math.isinf(self.p):
            raise InvalidNorm("use Norm.sup() for p = inf")
        if weights is not None:
            if kind == "polyhedral":
                raise InvalidNorm("polyhedral norms take functionals, not weights")
            w = np.asarray(weights, dtype=float)
            if w.ndim != 1 or w.size == 0 or not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise InvalidNorm("weights must be a non-empty vector of positive reals")
            self.weights = w
            self._scale = w if kind == "sup" else w ** (1.0 / self.p)
        if kind == "polyhedral":
            F = np.atleast_2d(np.asarray(functionals, dtype=float))
            if F.ndim != 2 or F.size == 0 or not np.all(np.isfinite(F)):
                raise InvalidNorm("functionals must be a finite (k, n) array")
            if np.linalg.matrix_rank(F) < F.shape[1]:
                raise InvalidNorm("polyhedral functionals must span the dual space")
            self.functionals = _dedupe_up_to_sign(F)

    # -- construction ---------------------------------------------------

    @classmethod
    def lp(cls, p, weights=None):
        if math.isinf(float(p)):
            return cls("sup", weights=weights)
        return cls("lp", p=p, weights=weights)

    @classmethod
    def sup(cls, weights=None):
        return cls("sup", weights=weights)

    @classmethod
    def polyhedral(cls, functionals):
        return cls("polyhedral", functionals=functionals)

    @classmethod
    def from_spec(cls, spec):
        """Build a norm from a plain mapping such as ``{"kind": "lp", "p": 2}``."""
        spec = dict(spec)
        kind = spec.pop("kind", None)
        if kind == "lp":
            p = spec.pop("p", 2.0)
            if isinstance(p, str) and p.lower() in ("inf", "infinity"):
                return cls.sup(weights=spec.pop("weights", None))
            norm = cls.lp(p, weights=spec.pop("weights", None))
        elif kind == "sup":
            norm = cls.sup(weights=spec.pop("weights", None))
        elif kind == "polyhedral":
            norm = cls.polyhedral(spec.pop("functionals", None))
        else:
            raise InvalidNorm(f"unknown norm kind {kind!r}")
        if spec:
            raise InvalidNorm(f"unexpected norm fields {sorted(spec)}")
        return norm

    def spec(self):
        out = {"kind": self.kind}
        if self.kind == "lp":
            out["p"] = self.p
        if self.weights is not None:
            out["weights"] = self.weights.tolist()
        if self.functionals is not None:
            out["functionals"] = self.functionals.tolist()
        return out

    def __eq__(self, other):
        return isinstance(other, Norm) and self.spec() == other.spec()

    def __hash__(self):
        return hash(repr(self.spec()))

    def __repr__(self):
        if self.kind == "lp":
            base = f"Norm.lp({self.p:g}"
        elif self.kind == "sup":
            base = "Norm.sup("
        else:
            return f"Norm.polyhedral(<{len(self.functionals)} functionals>)"
        if self.weights is not None:
            base += ("" if base.endswith("(") else ", ") + f"weights={self.weights.tolist()}"
        return base + ")"

    # -- metadata -------------------------------------------------------

    @property
    def dim(self):
        """Fixed ambient dimension, or None when any dimension is accepted."""
        if self.functionals is not None:
            return self.functionals.shape[1]
        if self.weights is not None:
            return self.weights.size
        return None

    @property
    def smooth_away_from_zero(self):
        return self.kind == "lp" and self.p > 1.0

    @property
    def strictly_convex(self):
        return self.kind == "lp" and self.p > 1.0

    @property
    def polyhedral_type(self):
        """True when the unit ball is a polytope (l1, sup, polyhedral)."""
        return self.kind in ("sup", "polyhedral") or self.p == 1.0

    @property
    def euclidean_type(self):
        return self.kind == "lp" and self.p == 2.0

    @property
    def conjugate_exponent(self):
        if self.kind == "sup":
            return 1.0
        if self.kind == "polyhedral":
            return None
        return math.inf if self.p == 1.0 else self.p / (self.p - 1.0)

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.ndim == 0:
            raise DimensionMismatch("expected a vector")
        d = self.dim
        if d is not None and v.shape[-1] != d:
            raise DimensionMismatch(f"norm acts on R^{d}, got vectors of length {v.shape[-1]}")
        return v

    # -- evaluation -----------------------------------------------------

    def __call__(self, v):
        v = self._check(v)
        if self.kind == "polyhedral":
            out = np.max(np.abs(v @ self.functionals.T), axis=-1)
        else:
            a = v * self._scale if self._scale is not None else v
            out = _lp_value(np.abs(a), self.p)
        return float(out) if np.ndim(out) == 0 else out

    def dual(self, f):
        """Dual norm sup{<f, u> : ||u|| <= 1}."""
        f = self._check(f)
        if self.kind == "polyhedral":
            return _polyhedral_dual(self.functionals, f)
        ft = f / self._scale if self._scale is not None else f
        out = _lp_value(np.abs(ft), self.conjugate_exponent)
        return float(out) if np.ndim(out) == 0 else out

    def dual_argmax(self, f):
        """A unit vector u with <f, u> = dual(f); ties go to the lowest index."""
        f = as_vector(f)
        self._check(f)
        if not np.any(f):
            raise ZeroFunctional("functional is zero")
        if self.kind == "polyhedral":
            F = self.functionals
            res = linprog(-f, A_ub=np.vstack([F, -F]), b_ub=np.ones(2 * len(F)),
                          bounds=[(None, None)] * f.size, method="highs")
            return res.x / self(res.x)
        ft = f / self._scale if self._scale is not None else f
        if self.kind == "sup":
            a = np.where(ft >= 0, 1.0, -1.0)
        elif self.p == 1.0:
            k = int(np.argmax(np.abs(ft)))
            a = np.zeros_like(ft)
            a[k] = math.copysign(1.0, ft[k])
        else:
            q = self.conjugate_exponent
            r = np.abs(ft) / _lp_value(np.abs(ft), q)
            a = np.sign(ft) * r ** (q - 1.0)
        u = a / self._scale if self._scale is not None else a
        return u / self(u)

    def gradient(self, v):
        """Gateaux derivative of the norm at ``v`` as a dual vector.

        Raises :class:`ZeroVector` at the origin and :class:`NonsmoothPoint`
        on the kink set of l1 / sup / polyhedral norms.
        """
        v = as_vector(v)
        self._check(v)
        nv = self(v)
        if nv == 0.0:
            raise ZeroVector("the norm is not differentiable at 0")
        if self.kind == "polyhedral":
            vals = self.functionals @ v
            order = np.argsort(-np.abs(vals), kind="stable")
            if len(order) > 1 and abs(vals[order[0]]) - abs(vals[order[1]]) < KINK_TOL * nv:
                raise NonsmoothPoint("two functionals are active")
            k = order[0]
            return math.copysign(1.0, vals[k]) * self.functionals[k]
        a = v * self._scale if self._scale is not None else v
        na = np.abs(a)
        if self.kind == "sup":
            order = np.argsort(-na, kind="stable")
            if len(order) > 1 and na[order[0]] - na[order[1]] < KINK_TOL * nv:
                raise NonsmoothPoint("two coordinates attain the max")
            g = np.zeros_like(a)
            g[order[0]] = math.copysign(1.0, a[order[0]])
        elif self.p == 1.0:
            if np.min(na) < KINK_TOL * nv:
                raise NonsmoothPoint("a coordinate vanishes")
            g = np.sign(a)
        else:
            g = np.sign(a) * (na / nv) ** (self.p - 1.0)
        return g * self._scale if self._scale is not None else g

    def subgradient(self, v):
        """Some element of the subdifferential of the norm at ``v``.

        Agrees with :meth:`gradient` at smooth points; at kinks the first
        active coordinate / functional wins and vanishing l1 coordinates get 0.
        """
        v = np.asarray(v, dtype=float)
        nv = self(v)
        if nv == 0.0:
            return np.zeros_like(v)
        if self.kind == "polyhedral":
            vals = self.functionals @ v
            k = int(np.argmax(np.abs(vals)))
            return math.copysign(1.0, vals[k]) * self.functionals[k]
        a = v * self._scale if self._scale is not None else v
        if self.kind == "sup":
            k = int(np.argmax(np.abs(a)))
            g = np.zeros_like(a)
            g[k] = math.copysign(1.0, a[k])
        elif self.p == 1.0:
            g = np.sign(a)
        else:
            g = np.sign(a) * (np.abs(a) / nv) ** (self.p - 1.0)
        return g * self._scale if self._scale is not None else g

    def unit(self, v):
        v = as_vector(v)
        n = self(v)
        if n == 0.0:
            raise ZeroVector("cannot normalize the zero vector")
        return v / n


def _lp_value(a, p):
    """l^p norm of nonnegative entries along the last axis, overflow-safe."""
    if math.isinf(p):
        return np.max(a, axis=-1)
    if p == 1.0:
        return np.sum(a, axis=-1)
    m = np.max(a, axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    r = a / safe
    inner = np.sum(r * r, axis=-1) if p == 2.0 else np.sum(r ** p, axis=-1)
    out = safe[..., 0] * (np.sqrt(inner) if p == 2.0 else inner ** (1.0 / p))
    return np.where(m[..., 0] > 0, out, 0.0)


def _polyhedral_dual(F, f):
    # the dual ball is the symmetric hull of the functionals:
    # min sum|mu| subject to F^T mu = f
    if f.ndim > 1:
        return np.array([_polyhedral_dual(F, row) for row in f.reshape(-1, f.shape[-1])]).reshape(f.shape[:-1])
    k = len(F)
    A = np.hstack([F.T, -F.T])
    res = linprog(np.ones(2 * k), A_eq=A, b_eq=f, bounds=[(0, None)] * (2 * k), method="highs")
    return float(res.fun)


def _dedupe_up_to_sign(F):
    keep = []
    for row in F:
        if not np.any(row):
            continue
        if any(np.allclose(row, r, rtol=0, atol=1e-14) or np.allclose(row, -r, rtol=0, atol=1e-14) for r in keep):
            continue
        keep.append(row)
    return np.array(keep)


def norm_eval(norm, v):
    return norm(as_vector(v))


def norm_gradient(norm, v):
    return norm.gradient(v)
