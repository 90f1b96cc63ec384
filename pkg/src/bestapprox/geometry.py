"""Sampling probes for the shape of a norm's unit ball.

Every probe is a seeded multi-start search, so each verdict is evidence
tied to its budget and seed rather than a proof.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import NotOnUnitSphere, ZeroFunctional
from .norms import as_vector, pairing

# midpoints closer than this to the unit sphere count as lying on it
SPHERE_TOL = 1e-9
# pairs closer than this are never reported as strict-convexity witnesses
MIN_WITNESS_SEPARATION = 1e-3


@dataclass
class StrictConvexityVerdict:
    verdict: str  # "StrictlyConvexEvidence" or "Witness"
    witness: tuple | None
    best_midpoint_norm: float
    min_separation: float
    budget: int
    seed: int

    @property
    def has_witness(self):
        return self.witness is not None


@dataclass
class ConvexityReport:
    epsilon: float
    delta_estimate: float
    witness_pair: tuple | None
    sample_count: int


@dataclass
class ExposureReport:
    verdict: str  # "ExposesEvidence" or "FailureWitness"
    etas: list
    maxima: list
    points: list = field(default_factory=list)
    lower_bound: float | None = None
    budget: int = 0

    @property
    def exposes(self):
        return self.verdict == "ExposesEvidence"


def structured_directions(dim):
    """Coordinate vectors, their negatives, then the remaining {-1,0,1} patterns."""
    eye = np.eye(dim)
    out = [row for row in eye] + [-row for row in eye]
    if dim <= 4:
        seen = {tuple(r) for r in out}
        for signs in itertools.product((1.0, -1.0, 0.0), repeat=dim):
            if any(signs) and signs not in seen:
                out.append(np.array(signs))
                seen.add(signs)
    else:
        out.append(np.ones(dim))
        out.append(-np.ones(dim))
    return np.array(out)


def _sphere(norm, raw):
    return raw / np.asarray(norm(raw))[..., None]


def _candidate_pairs(norm, dim, budget, rng):
    S = _sphere(norm, structured_directions(dim))
    i, j = np.triu_indices(len(S), k=1)
    X = [S[i]]
    Y = [S[j]]
    if budget > 0:
        X.append(_sphere(norm, rng.standard_normal((budget, dim))))
        Y.append(_sphere(norm, rng.standard_normal((budget, dim))))
    return np.vstack(X), np.vstack(Y)


def _pair_objective(norm, dim):
    def unpack(z):
        x = z[:dim] / norm(z[:dim])
        y = z[dim:] / norm(z[dim:])
        return x, y

    return unpack


def strict_convexity_probe(norm, dim, sampler_seed=0, budget=2000, min_separation=0.1,
                           refine=5):
    """Search for distinct unit vectors whose midpoint is still a unit vector.

    Candidate pairs are structured sign patterns plus ``budget`` random
    sphere pairs with ``||x - y|| >= min_separation``; the best few
    non-witness pairs are then pushed towards the sphere by a local
    maximization of ``||(x + y)/2||``.  Among witnesses the most separated
    one is reported.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    min_separation = max(float(min_separation), MIN_WITNESS_SEPARATION)
    rng = np.random.default_rng(sampler_seed)
    X, Y = _candidate_pairs(norm, dim, budget, rng)
    sep = norm(X - Y)
    mid = norm((X + Y) / 2)
    ok = sep >= min_separation
    best = float(np.max(mid[ok])) if np.any(ok) else 0.0

    hits = np.flatnonzero(ok & (mid >= 1 - SPHERE_TOL))
    if hits.size == 0 and refine > 0:
        unpack = _pair_objective(norm, dim)
        cand = np.flatnonzero(ok)
        cand = cand[np.argsort(-mid[cand], kind="stable")][:refine]
        extra_x, extra_y = [], []
        for k in cand:

            def obj(z):
                x, y = unpack(z)
                gap = max(0.0, min_separation - norm(x - y))
                return -norm((x + y) / 2) + 1e3 * gap

            res = minimize(obj, np.concatenate([X[k], Y[k]]), method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 1500})
            x, y = unpack(res.x)
            extra_x.append(x)
            extra_y.append(y)
        if extra_x:
            ex, ey = np.array(extra_x), np.array(extra_y)
            esep, emid = norm(ex - ey), norm((ex + ey) / 2)
            good = esep >= min_separation
            if np.any(good):
                best = max(best, float(np.max(emid[good])))
            X, Y = np.vstack([X, ex]), np.vstack([Y, ey])
            sep, mid = np.concatenate([sep, esep]), np.concatenate([mid, emid])
            hits = np.flatnonzero((sep >= min_separation) & (mid >= 1 - SPHERE_TOL))

    if hits.size:
        k = hits[int(np.argmax(sep[hits]))]
        return StrictConvexityVerdict("Witness", (X[k].copy(), Y[k].copy()), float(mid[k]),
                                      min_separation, budget, sampler_seed)
    return StrictConvexityVerdict("StrictlyConvexEvidence", None, best, min_separation,
                                  budget, sampler_seed)


def modulus_of_convexity(norm, dim, epsilon, budget=2000, seed=0, refine=8):
    """Estimate delta(eps) = 1 - sup{||(x+y)/2|| : x, y unit, ||x - y|| >= eps}.

    Only pairs that satisfy the separation constraint exactly are scored,
    so the estimate is an upper bound on the true modulus.
    """
    epsilon = float(epsilon)
    if not 0.0 < epsilon <= 2.0:
        raise ValueError(f"epsilon must lie in (0, 2], got {epsilon}")
    rng = np.random.default_rng(seed)
    X, Y = _candidate_pairs(norm, dim, budget, rng)
    sep = norm(X - Y)
    mid = norm((X + Y) / 2)
    ok = np.flatnonzero(sep >= epsilon)
    n_samples = len(X)

    best_mid, best_pair = -math.inf, None
    if ok.size:
        k = ok[int(np.argmax(mid[ok]))]
        best_mid, best_pair = float(mid[k]), (X[k].copy(), Y[k].copy())

    unpack = _pair_objective(norm, dim)
    starts = ok[np.argsort(-mid[ok], kind="stable")][:refine] if ok.size else []
    # a little inflation keeps SLSQP's boundary solutions strictly feasible
    target = min(epsilon * (1 + 1e-9), 2.0)
    cons = {"type": "ineq", "fun": lambda z: norm(np.subtract(*unpack(z))) - target}
    for k in starts:
        res = minimize(lambda z: -norm(np.add(*unpack(z)) / 2), np.concatenate([X[k], Y[k]]),
                       method="SLSQP", constraints=[cons],
                       options={"ftol": 1e-15, "maxiter": 500})
        x, y = unpack(res.x)
        n_samples += 1
        if norm(x - y) >= epsilon:
            m = norm((x + y) / 2)
            if m > best_mid:
                best_mid, best_pair = float(m), (x, y)

    if best_pair is None:
        # no sampled pair was separated enough: the trivial bound delta <= 1
        return ConvexityReport(epsilon, 1.0, None, n_samples)
    delta = min(1.0, max(0.0, 1.0 - best_mid))
    return ConvexityReport(epsilon, delta, best_pair, n_samples)


def _cap_argmax_lp(norm, g, f, level):
    """max <g, z> over the unit ball intersected with {<f, z> >= level} (polyhedral balls)."""
    n = g.size
    if norm.kind == "polyhedral":
        F = norm.functionals
        A = np.vstack([F, -F, -f[None, :]])
        b = np.concatenate([np.ones(2 * len(F)), [-level]])
        res = linprog(-g, A_ub=A, b_ub=b, bounds=[(None, None)] * n, method="highs")
        return res.x
    w = norm.weights if norm.weights is not None else np.ones(n)
    if norm.kind == "sup":
        res = linprog(-g, A_ub=-f[None, :], b_ub=[-level],
                      bounds=[(-1 / wi, 1 / wi) for wi in w], method="highs")
        return res.x
    # weighted l1 ball: z = zp - zm
    c = np.concatenate([-g, g])
    A = np.vstack([np.concatenate([w, w]), np.concatenate([-f, f])])
    res = linprog(c, A_ub=A, b_ub=[1.0, -level], bounds=[(0, None)] * (2 * n), method="highs")
    return res.x[:n] - res.x[n:]


def _cap_argmax_smooth(norm, g, f, level):
    # maximizers of <g + mu f, .> over the ball trace a path along which
    # <f, z> increases with mu; bisect for the multiplier
    def z_of(mu):
        return norm.dual_argmax(g + mu * f)

    z0 = z_of(0.0)
    if pairing(f, z0) >= level:
        return z0
    hi = 1.0
    while pairing(f, z_of(hi)) < level:
        hi *= 2.0
        if hi > 1e300:
            return norm.dual_argmax(f)
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if pairing(f, z_of(mid)) >= level:
            hi = mid
        else:
            lo = mid
    return z_of(hi)


def strongly_exposes_check(norm, f, x, eta_schedule=(1e-2, 1e-4, 1e-6, 1e-8), budget=64,
                           seed=0, shrink_ratio=0.1):
    """Probe whether ``f`` strongly exposes the unit ball at ``x``.

    For each slack eta the largest ``||z - x||`` over unit-ball points with
    ``<f, z> >= <f, x> - eta`` is found by maximizing ``<g, z>`` over that
    convex slice for ``budget`` dual directions g.  Evidence of exposure
    requires the maxima to shrink by ``shrink_ratio`` across the schedule;
    otherwise the maximizers form the failure witness and the smallest
    maximum is the reported lower bound.
    """
    f = as_vector(f)
    x = as_vector(x, f.size)
    if not np.any(f):
        raise ZeroFunctional("functional is zero")
    if abs(norm(x) - 1.0) > 1e-9:
        raise NotOnUnitSphere(f"||x|| = {norm(x)!r}")
    etas = sorted((float(e) for e in eta_schedule), reverse=True)
    if not etas or etas[-1] <= 0:
        raise ValueError("eta_schedule must hold positive reals")

    dim = f.size
    rng = np.random.default_rng(seed)
    if dim == 2:
        ang = np.linspace(0.0, 2 * np.pi, max(budget, 8), endpoint=False)
        dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    else:
        dirs = np.vstack([np.eye(dim), -np.eye(dim), rng.standard_normal((max(budget, 1), dim))])
    solve = _cap_argmax_lp if norm.polyhedral_type else _cap_argmax_smooth

    fx = pairing(f, x)
    maxima, points = [], []
    for eta in etas:
        best, best_z = -1.0, x
        for g in dirs:
            try:
                z = solve(norm, g, f, fx - eta)
            except ZeroFunctional:
                continue
            dz = norm(z - x)
            if dz > best:
                best, best_z = dz, z
        maxima.append(float(best))
        points.append(best_z)

    tiny = 1e-9
    exposes = maxima[-1] <= max(shrink_ratio * maxima[0], tiny)
    if exposes:
        return ExposureReport("ExposesEvidence", etas, maxima, points, None, len(dirs))
    return ExposureReport("FailureWitness", etas, maxima, points, float(min(maxima)), len(dirs))
