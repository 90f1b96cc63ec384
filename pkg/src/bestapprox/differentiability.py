"""Finite-difference derivatives of the distance function and the checks built on them."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NonDifferentiablePoint, PointInSet, StepTooSmall, ZeroVector
from .geometry import strongly_exposes_check
from .norms import as_vector
from .projection import (DEFAULT_CONFIG, best_approximations, distance, max_pairwise,
                         minimizing_sequence)

DEFAULT_STEPS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
# one-sided limits closer than this are never flagged, whatever the span
ONE_SIDED_FLOOR = 1e-6


def diff_config(cfg):
    """Tighten the solver for differentiation runs."""
    return replace(cfg, tolerance=min(cfg.tolerance, 1e-10), method="auto")


def _richardson(values, ratio, order):
    # D(h) = D + c h^order + ...; combine consecutive steps h, h*ratio
    k = ratio ** -order
    return [(k * b - a) / (k - 1.0) for a, b in zip(values, values[1:])]


@dataclass
class DerivativeEstimate:
    base_point: np.ndarray
    direction: np.ndarray
    step_schedule: list
    one_sided_values: list  # (forward, backward) per step
    symmetric_values: list
    extrapolated: float
    stability_span: float
    forward_limit: float = 0.0
    backward_limit: float = 0.0
    non_gateaux: bool = False

    def lipschitz_ok(self, norm):
        return abs(self.extrapolated) <= norm(self.direction) + self.stability_span


def _check_steps(steps, tol):
    steps = [float(h) for h in steps]
    if len(steps) < 2 or any(b >= a for a, b in zip(steps, steps[1:])) or steps[-1] <= 0:
        raise ValueError("steps must be strictly decreasing positive reals (at least two)")
    if steps[-1] < 10 * tol:
        raise StepTooSmall(f"smallest step {steps[-1]:g} is below 10 x solver tolerance {tol:g}")
    return steps


def gateaux_derivative_dK(x, z, K, norm, steps=DEFAULT_STEPS, cfg=DEFAULT_CONFIG):
    """Directional derivative of d_K at x along z (z is not normalized).

    Forward, backward and symmetric quotients are each Richardson
    extrapolated; the symmetric one is the estimate, and the point is
    flagged non-Gateaux when the one-sided limits disagree by more than
    ``10 * stability_span`` (plus a small noise floor).
    """
    cfg = diff_config(cfg)
    x = as_vector(x, K.dim)
    z = as_vector(z, K.dim)
    if not np.any(z):
        raise ZeroVector("direction is zero")
    steps = _check_steps(steps, cfg.tolerance)
    d0 = distance(x, K, norm, cfg).distance
    if d0 <= 10 * cfg.tolerance:
        raise PointInSet("x lies in K")
    fwd, bwd, sym = [], [], []
    for h in steps:
        dp = distance(x + h * z, K, norm, cfg).distance
        dm = distance(x - h * z, K, norm, cfg).distance
        fwd.append((dp - d0) / h)
        bwd.append((d0 - dm) / h)
        sym.append((dp - dm) / (2 * h))
    ratio = steps[1] / steps[0]
    ext = _richardson(sym, ratio, 2)
    f_ext = _richardson(fwd, ratio, 1)
    b_ext = _richardson(bwd, ratio, 1)
    tail = ext[-3:]
    span = float(max(tail) - min(tail))
    f_lim, b_lim = f_ext[-1], b_ext[-1]
    flagged = abs(f_lim - b_lim) > 10 * span + ONE_SIDED_FLOOR
    return DerivativeEstimate(x, z, steps, list(zip(fwd, bwd)), sym, float(ext[-1]), span,
                              float(f_lim), float(b_lim), bool(flagged))


@dataclass
class GradientEstimate:
    gradient: np.ndarray
    components: list
    stability_span: float


def assemble_gradient(x, K, norm, steps=DEFAULT_STEPS, cfg=DEFAULT_CONFIG):
    """Gradient of d_K at x from coordinate directional derivatives."""
    x = as_vector(x, K.dim)
    comps = [gateaux_derivative_dK(x, e, K, norm, steps, cfg) for e in np.eye(K.dim)]
    bad = [i for i, c in enumerate(comps) if c.non_gateaux]
    if bad:
        c = comps[bad[0]]
        raise NonDifferentiablePoint(
            f"one-sided derivatives along e_{bad[0] + 1} differ: "
            f"{c.forward_limit:.6g} vs {c.backward_limit:.6g}")
    grad = np.array([c.extrapolated for c in comps])
    return GradientEstimate(grad, comps, max(c.stability_span for c in comps))


@dataclass
class FrechetVerdict:
    epsilon_grid: list
    residuals: list  # worst-direction residual ratio per epsilon
    deltas: list  # smallest certified delta per epsilon
    uniform: bool
    worst_direction: np.ndarray
    gradient: np.ndarray
    direction_budget: int
    seed: int
    radii: list = field(default_factory=list, repr=False)


def _unit_directions(norm, dim, budget, rng):
    eye = np.eye(dim)
    raw = np.vstack([eye, -eye, rng.standard_normal((max(budget - 2 * dim, 0), dim))])[:budget]
    return raw / np.asarray(norm(raw))[:, None]


def frechet_check_dK(x, K, norm, epsilon_grid=(1e-1, 1e-2, 1e-3), direction_budget=None,
                     seed=0, cfg=DEFAULT_CONFIG, radii=None):
    """Audit |d(x+y) - d(x) - <g, y>| <= eps ||y|| over sampled unit directions.

    For each direction u and each eps, delta_u is the largest radius r in
    the grid such that the inequality holds for every grid radius <= r
    along u (0 if it fails at the smallest).  The verdict is uniform when
    min_u delta_u > 0 for every eps.  ``residuals`` reports, per eps, the
    worst ratio |remainder| / r seen at the smallest radius.
    """
    cfg = diff_config(cfg)
    x = as_vector(x, K.dim)
    grad = assemble_gradient(x, K, norm, cfg=cfg).gradient
    dim = K.dim
    if direction_budget is None:
        direction_budget = 200 if dim <= 3 else 1000
    rng = np.random.default_rng(seed)
    U = _unit_directions(norm, dim, direction_budget, rng)
    if radii is None:
        radii = [10.0 ** (-k / 4) for k in range(4, 29)]  # 1e-1 .. 1e-7
    radii = sorted(float(r) for r in radii)
    d0 = distance(x, K, norm, cfg).distance
    # ratio[i, j] = |remainder| / r for direction i, radius j
    ratio = np.empty((len(U), len(radii)))
    for i, u in enumerate(U):
        lin = float(grad @ u)
        for j, r in enumerate(radii):
            rem = distance(x + r * u, K, norm, cfg).distance - d0 - r * lin
            ratio[i, j] = abs(rem) / r
    residuals, deltas = [], []
    worst_i = 0
    uniform = True
    for eps in epsilon_grid:
        ok = ratio <= eps
        # delta_u: largest prefix (from the smallest radius) that holds
        run = np.cumprod(ok, axis=1)
        count = run.sum(axis=1)
        delta_u = np.array([radii[c - 1] if c > 0 else 0.0 for c in count])
        deltas.append(float(delta_u.min()))
        residuals.append(float(ratio[:, 0].max()))
        if delta_u.min() <= 0:
            uniform = False
        worst_i = int(np.argmin(delta_u)) if delta_u.min() <= 0 else int(np.argmax(ratio[:, 0]))
    return FrechetVerdict(list(epsilon_grid), residuals, deltas, uniform, U[worst_i].copy(), grad,
                          direction_budget, seed, radii)


def lemma1_check(x, K, norm, cfg=DEFAULT_CONFIG, steps=DEFAULT_STEPS):
    """Residuals |<d'_K(x), (x - y)/||x - y||> - 1| over the computed best approximations."""
    x = as_vector(x, K.dim)
    try:
        g = assemble_gradient(x, K, norm, steps, cfg)
    except NonDifferentiablePoint as exc:
        return {"status": "non_differentiable", "reason": str(exc), "residuals": [],
                "passed": None}
    res = best_approximations(x, K, norm, cfg=diff_config(cfg))
    residuals = []
    for y in res.minimizers:
        v = x - y
        residuals.append(abs(float(g.gradient @ v) / float(norm(v)) - 1.0))
    threshold = 1e-5 + 10 * g.stability_span
    return {"status": "ok", "gradient": g.gradient, "minimizers": res.minimizers,
            "residuals": residuals, "stability_span": g.stability_span, "threshold": threshold,
            "passed": all(r <= threshold for r in residuals)}


def theorem2_convergence_experiment(x, K, norm,
                                    sequence_strategies=("SolverIterates", "RandomizedDescent",
                                                         "Adversarial"),
                                    cfg=DEFAULT_CONFIG, length=64, seed=0, spread_tol=1e-4,
                                    frechet_kwargs=None, exposure_kwargs=None):
    """Check the hypotheses at x, then compare the limits of several minimizing sequences.

    Hypotheses: d_K is Frechet differentiable at x (sampled uniformity) and
    its derivative strongly exposes the unit ball at (x - y)/||x - y||.
    The sequences are generated whatever the hypotheses say, so a failing
    hypothesis can be paired with the divergence it permits.
    """
    x = as_vector(x, K.dim)
    hyp = {}
    grad = None
    try:
        fv = frechet_check_dK(x, K, norm, seed=seed, cfg=cfg, **(frechet_kwargs or {}))
        hyp["frechet"] = {"passed": fv.uniform, "verdict": fv}
        grad = fv.gradient
    except NonDifferentiablePoint as exc:
        hyp["frechet"] = {"passed": False, "reason": str(exc)}
    base = best_approximations(x, K, norm, cfg=diff_config(cfg))
    y = base.minimizer
    if grad is not None:
        u = (x - y) / norm(x - y)
        ex = strongly_exposes_check(norm, grad / norm.dual(grad), u, seed=seed,
                                    **(exposure_kwargs or {}))
        hyp["exposure"] = {"passed": ex.exposes, "verdict": ex}
    else:
        hyp["exposure"] = {"passed": False, "reason": "no derivative to test"}

    per = {}
    limits = []
    for k, strat in enumerate(sequence_strategies):
        seq = minimizing_sequence(x, K, norm, strat, length, seed + k, cfg)
        per[strat] = {"limit": seq.limit, "tail_diameter": seq.cauchy_tail_diameter,
                      "final_value": seq.values[-1], "target": seq.target, "sequence": seq}
        limits.append(seq.limit)
    spread = max_pairwise(limits, norm)
    tails = max(p["tail_diameter"] for p in per.values())
    converged = spread < spread_tol
    failing = [name for name, h in hyp.items() if not h["passed"]]
    return {"hypotheses_met": not failing, "failing_checks": failing,
            "status": "ok" if not failing else "hypotheses not met", "hypotheses": hyp,
            "per_strategy": per, "limit_spread": spread, "max_tail_diameter": tails,
            "converged": converged, "minimizer": y, "distance": base.distance,
            # the contrapositive surface: passing hypotheses must never diverge
            "consistent": converged or bool(failing)}
