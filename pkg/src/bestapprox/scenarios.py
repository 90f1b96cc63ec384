"""Scenario configurations, the builtin experiments and their reports."""

from __future__ import annotations

import copy
import csv
import io
import json
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .differentiability import (assemble_gradient, frechet_check_dK, lemma1_check,
                                theorem2_convergence_experiment)
from .errors import BestApproxError, ConfigError, NonDifferentiablePoint
from .geometry import modulus_of_convexity, strict_convexity_probe, strongly_exposes_check
from .norms import Norm
from .projection import (SolverConfig, approximative_compactness_probe, best_approximations,
                         chebyshev_verdict, distance, grid_oracle, lipschitz_check,
                         minimizing_sequence, projection_continuity_probe,
                         truncation_family_sequence, truncation_family_verdict)
from .sets import set_from_spec, truncated_l1_hull

CONFIG_VERSION = 1
KNOWN_CHECKS = ("distance", "best_approximations", "chebyshev", "lemma1", "frechet", "exposure",
                "theorem2", "lipschitz", "convexity", "crossval", "grid", "continuity",
                "compactness")
PREREQUISITES = {"theorem2": ("frechet", "exposure")}
DEFAULT_TOLERANCES = {"solver": 1e-10, "eps": 1e-9, "crossval": 1e-6, "lipschitz": 1e-6,
                      "lemma1": 1e-5, "spread": 1e-4}
FORMATS = {"csv": "csv", "delimited-text": "csv", "json": "json", "structured-text": "json"}
TABLE_COLUMNS = ("check", "series", "key", "value", "aux")


# -- configuration -----------------------------------------------------------------


def _normalize_checks(raw):
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ConfigError("checks", "must be a list")
    out = []
    for i, item in enumerate(raw):
        if isinstance(item, str):
            item = {"name": item, "params": {}}
        elif isinstance(item, dict) and len(item) == 1 and "name" not in item:
            (name, params), = item.items()
            item = {"name": name, "params": dict(params or {})}
        elif isinstance(item, dict):
            item = {"name": item.get("name"), "params": dict(item.get("params") or {})}
        else:
            raise ConfigError(f"checks[{i}]", "expected a name or a mapping")
        if item["name"] not in KNOWN_CHECKS:
            raise ConfigError(f"checks[{i}]", f"unknown check {item['name']!r}")
        out.append(item)
    # prerequisites run before the checks that need them
    ordered = []
    for c in out:
        for dep in PREREQUISITES.get(c["name"], ()):
            if all(o["name"] != dep for o in ordered):
                found = [o for o in out if o["name"] == dep]
                ordered.append(found[0] if found else {"name": dep, "params": {}})
        if all(o is not c for o in ordered):
            ordered.append(c)
    out = ordered
    return out


@dataclass
class ScenarioConfig:
    name: str
    norm: dict
    set: dict
    x: list | str | None = None
    probes: list | dict | None = None
    checks: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    expect_witness: list = field(default_factory=list)
    output: str | None = None
    description: str = ""
    version: int = CONFIG_VERSION

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ConfigError("name", "must be a non-empty string")
        if self.version != CONFIG_VERSION:
            raise ConfigError("version", f"unsupported version {self.version!r}")
        self.checks = _normalize_checks(self.checks)
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError("tolerances", f"unknown keys {sorted(unknown)}")
        for w in self.expect_witness:
            if w not in KNOWN_CHECKS:
                raise ConfigError("expect_witness", f"unknown check {w!r}")

    @classmethod
    def from_mapping(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("<root>", "scenario must be a mapping")
        names = {f.name for f in fields(cls)}
        extra = set(data) - names
        if extra:
            raise ConfigError(sorted(extra)[0], "unknown field")
        for req in ("name", "norm", "set"):
            if req not in data:
                raise ConfigError(req, "missing")
        return cls(**copy.deepcopy(data))

    def to_mapping(self):
        return {f.name: copy.deepcopy(getattr(self, f.name)) for f in fields(self)}

    def dumps(self):
        return yaml.safe_dump(self.to_mapping(), sort_keys=False)

    @classmethod
    def loads(cls, text):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError("<file>", f"not valid YAML: {exc}") from exc
        return cls.from_mapping(data)

    @classmethod
    def load(cls, path):
        return cls.loads(Path(path).read_text())

    def tolerance(self, key):
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))


# -- builtins ---------------------------------------------------------------------

_POLYGON = [[0.0, 0.0], [3.0, 0.0], [4.0, 2.0], [2.0, 3.5], [-0.5, 2.0]]

BUILTINS = {
    "l1_hull_family": {
        "description": "l1 distance from 0 to the truncated hulls of (n+1)/n e_n: trend to 1, never attained",
        "norm": {"kind": "lp", "p": 1},
        "set": {"type": "l1_hull_family", "sizes": [2**k for k in range(1, 13)]},
        "x": "origin",
        "checks": ["distance", "compactness", {"name": "crossval", "params": {"max_size": 64}},
                   {"name": "lipschitz", "params": {"member": 8}},
                   {"name": "grid", "params": {"member": 2}}],
        "expect_witness": ["distance", "compactness"],
    },
    "circle_center": {
        "description": "unit circle in l2: every point is nearest to the center, a unique one to (2,0)",
        "norm": {"kind": "lp", "p": 2},
        "set": {"type": "curve", "shape": "circle", "center": [0.0, 0.0], "radius": 1.0},
        "x": [2.0, 0.0],
        "probes": [[0.0, 0.0], [2.0, 0.0]],
        "checks": ["best_approximations", "chebyshev", "lipschitz", "grid"],
        "expect_witness": ["chebyshev"],
    },
    "theorem2_l2_polytope": {
        "description": "convex polygon in l2: Frechet and exposure hold, all minimizing sequences converge",
        "norm": {"kind": "lp", "p": 2},
        "set": {"type": "polytope", "vertices": _POLYGON},
        "x": [4.5, 3.5],
        "probes": {"count": 100, "box": [[-3.0, -3.0], [7.0, 6.5]]},
        "checks": ["distance", "crossval", "chebyshev",
                   {"name": "continuity", "params": {"radius": 0.5, "count": 64}},
                   "lemma1", "frechet", "exposure", "theorem2", "compactness", "lipschitz",
                   "grid"],
        "expect_witness": [],
    },
    "supnorm_flat_face": {
        "description": "segment [-2,2]x{0} under the sup norm seen from (0,1): a flat face of best approximations",
        "norm": {"kind": "sup"},
        "set": {"type": "polytope", "vertices": [[-2.0, 0.0], [2.0, 0.0]]},
        "x": [0.0, 1.0],
        "probes": [[0.0, 1.0]],
        "checks": ["best_approximations", "chebyshev", "crossval", "frechet", "exposure",
                   "theorem2", "lipschitz", "grid"],
        "expect_witness": ["chebyshev", "exposure", "theorem2"],
    },
    "l1_segment": {
        "description": "segment from (1,0) to (0,1) in l1: the whole segment is nearest to 0",
        "norm": {"kind": "lp", "p": 1},
        "set": {"type": "polytope", "vertices": [[1.0, 0.0], [0.0, 1.0]]},
        "x": [0.0, 0.0],
        "probes": [[0.0, 0.0]],
        "checks": ["best_approximations", "chebyshev", "crossval", "lipschitz", "grid"],
        "expect_witness": ["chebyshev"],
    },
    "two_point_jump": {
        "description": "two points (-1,0), (1,0) in l2: the projection jumps across the bisector",
        "norm": {"kind": "lp", "p": 2},
        "set": {"type": "points", "points": [[-1.0, 0.0], [1.0, 0.0]]},
        "x": [0.0, 1.0],
        "probes": [[0.0, 1.0], [0.5, 1.0]],
        "checks": ["chebyshev", {"name": "continuity", "params": {"radius": 0.1, "count": 64}},
                   "lipschitz", "grid"],
        "expect_witness": ["chebyshev", "continuity"],
    },
    "norm_geometry": {
        "description": "unit-ball shape of l1, sup and lp norms, plus the l2 ball as a set",
        "norm": {"kind": "lp", "p": 2},
        "set": {"type": "ball", "center": [0.0, 0.0], "radius": 1.0, "norm": {"kind": "lp", "p": 2}},
        "x": [2.0, 0.0],
        "checks": [{"name": "convexity", "params": {
                        "norms": [{"kind": "lp", "p": 1}, {"kind": "sup"}, {"kind": "lp", "p": 1.5},
                                  {"kind": "lp", "p": 2}, {"kind": "lp", "p": 3},
                                  {"kind": "lp", "p": 4}],
                        "epsilons": [0.5, 1.0, 1.5]}},
                   "distance", "crossval", "lemma1", "exposure", "lipschitz", "grid"],
        "expect_witness": ["convexity"],
    },
}


def builtin_config(name):
    if name not in BUILTINS:
        raise ConfigError("name", f"no builtin scenario {name!r}")
    return ScenarioConfig.from_mapping({"name": name, **copy.deepcopy(BUILTINS[name])})


def list_scenarios():
    """(name, description) for every builtin, in a stable order."""
    return [(name, BUILTINS[name]["description"]) for name in BUILTINS]


# -- running ------------------------------------------------------------------------


def check_seed(seed, index):
    """Counter-based expansion of the top-level seed."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint32)[0])


def _plain(obj):
    """Convert results to JSON-ready builtins."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, Norm):
        return obj.spec()
    return obj


class _Context:
    def __init__(self, config, seed, budget_scale, tolerance):
        self.config = config
        self.seed = seed
        self.scale = float(budget_scale)
        try:
            self.norm = Norm.from_spec(config.norm)
        except (BestApproxError, TypeError, ValueError) as exc:
            raise ConfigError("norm", str(exc)) from exc
        spec = dict(config.set)
        self.family = None
        try:
            if spec.get("type") == "l1_hull_family":
                sizes = [int(n) for n in spec["sizes"]]
                if not sizes or sorted(sizes) != sizes or len(set(sizes)) != len(sizes):
                    raise ValueError("sizes must be strictly increasing")
                self.family = [truncated_l1_hull(n) for n in sizes]
                self.K = None
            else:
                self.K = set_from_spec(spec)
        except (BestApproxError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError("set", str(exc)) from exc
        solver_tol = tolerance if tolerance is not None else config.tolerance("solver")
        try:
            self.cfg = SolverConfig(tolerance=float(solver_tol), eps=config.tolerance("eps"))
        except ValueError as exc:
            raise ConfigError("tolerances", str(exc)) from exc
        self.x = self._point(config.x, "x") if config.x is not None else None
        self.probes_spec = config.probes

    def _point(self, raw, where, K=None):
        K = K or self.K
        dim = K.dim if K is not None else None
        if raw == "origin":
            if dim is None:
                return None
            return np.zeros(dim)
        try:
            v = np.asarray(raw, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(where, "not a numeric vector") from exc
        if v.ndim != 1 or (dim is not None and v.size != dim):
            raise ConfigError(where, f"expected a vector of length {dim}")
        return v

    def x_of(self, K):
        if self.config.x == "origin" or self.config.x is None:
            return np.zeros(K.dim)
        return self._point(self.config.x, "x", K)

    def member(self, size):
        for K in self.family:
            if K.dim == size:
                return K
        return truncated_l1_hull(int(size))

    def budget(self, n):
        return max(1, int(round(n * self.scale)))

    def probes(self, seed):
        spec = self.probes_spec
        if spec is None:
            return [self.x] if self.x is not None else []
        if isinstance(spec, list):
            return [self._point(p, "probes") for p in spec]
        count = self.budget(int(spec.get("count", 100)))
        lo, hi = (np.asarray(b, dtype=float) for b in spec["box"])
        rng = np.random.default_rng(spec.get("seed", seed))
        out = []
        for _ in range(100 * count):
            p = rng.uniform(lo, hi)
            if not self.K.contains(p, 1e-9):
                out.append(p)
                if len(out) == count:
                    break
        return out


def _need_x(ctx, check):
    if ctx.x is None:
        raise ConfigError("x", f"check {check!r} needs a base point")
    return ctx.x


def _run_distance(ctx, params, seed):
    if ctx.family is not None:
        info = truncation_family_verdict(ctx.x_of, ctx.family, ctx.norm, ctx.cfg)
        rows = [{"size": K.dim, "distance": d, "min_gap_to_smaller": g}
                for K, d, g in zip(ctx.family, info["distances"], info["min_gaps"])]
        attains = any(d <= 1.0 + 1e-9 for d in info["distances"])
        return {"verdict": info["verdict"], "rows": rows,
                "strictly_decreasing": info["strictly_decreasing"],
                "min_pairwise_gap": info["min_pairwise_gap"], "any_value_at_most_one": attains,
                "witness": info["verdict"] == "NotProximinalEvidence"}
    pts = [ctx.x] if ctx.x is not None else []
    pts += [p for p in ctx.probes(seed) if ctx.x is None or not np.array_equal(p, ctx.x)]
    rows = []
    for p in pts:
        r = distance(p, ctx.K, ctx.norm, ctx.cfg)
        rows.append({"point": p, "distance": r.distance, "minimizer": r.minimizer,
                     "attained": r.attained, "method": r.method, "iterations": r.iterations,
                     "residual": r.residual})
    return {"rows": rows, "passed": all(r["attained"] for r in rows)}


def _approx_rows(ctx, pts):
    rows = []
    for p in pts:
        r = best_approximations(p, ctx.K, ctx.norm, cfg=ctx.cfg)
        rows.append({"point": p, "distance": r.distance, "cluster_count": len(r.clusters),
                     "cluster_diameter": r.cluster_diameter, "singleton": r.singleton,
                     "minimizers": r.minimizers, "attained": r.attained})
    return rows


def _run_best_approximations(ctx, params, seed):
    pts = ctx.probes(seed) if ctx.probes_spec is not None else [_need_x(ctx, "best_approximations")]
    return {"rows": _approx_rows(ctx, pts)}


def _run_chebyshev(ctx, params, seed):
    rep = chebyshev_verdict(ctx.K, ctx.norm, ctx.probes(seed), ctx.cfg)
    return {"verdict": rep.verdict, "witness_point": rep.witness, "probe_count": len(rep.sample_points),
            "per_point": [{k: v for k, v in row.items()} for row in rep.per_point],
            "witness": rep.verdict != "ChebyshevEvidence"}


def _run_lemma1(ctx, params, seed):
    x = _need_x(ctx, "lemma1")
    rep = lemma1_check(x, ctx.K, ctx.norm, ctx.cfg)
    out = {k: v for k, v in rep.items()}
    if rep["status"] == "ok":
        limit = ctx.config.tolerance("lemma1")
        out["passed"] = bool(rep["passed"] and max(rep["residuals"]) < limit)
        out["limit"] = limit
    return out


def _run_frechet(ctx, params, seed):
    x = _need_x(ctx, "frechet")
    budget = params.get("direction_budget")
    if budget is None:
        budget = 200 if ctx.K.dim <= 3 else 1000
    try:
        v = frechet_check_dK(x, ctx.K, ctx.norm, tuple(params.get("epsilon_grid", (1e-1, 1e-2, 1e-3))),
                             ctx.budget(budget), seed, ctx.cfg)
    except NonDifferentiablePoint as exc:
        return {"status": "non_differentiable", "reason": str(exc), "uniform": False}
    return {"uniform": v.uniform, "epsilon_grid": v.epsilon_grid, "deltas": v.deltas,
            "residuals": v.residuals, "worst_direction": v.worst_direction, "gradient": v.gradient,
            "direction_budget": v.direction_budget}


def _exposure_target(ctx):
    x = _need_x(ctx, "exposure")
    g = assemble_gradient(x, ctx.K, ctx.norm, cfg=ctx.cfg).gradient
    y = best_approximations(x, ctx.K, ctx.norm, cfg=ctx.cfg).minimizer
    return g / ctx.norm.dual(g), (x - y) / ctx.norm(x - y)


def _run_exposure(ctx, params, seed):
    if "functional" in params:
        f = np.asarray(params["functional"], dtype=float)
        u = np.asarray(params["point"], dtype=float)
    else:
        try:
            f, u = _exposure_target(ctx)
        except NonDifferentiablePoint as exc:
            return {"status": "non_differentiable", "reason": str(exc), "witness": False}
    rep = strongly_exposes_check(ctx.norm, f, u, budget=ctx.budget(64), seed=seed)
    return {"verdict": rep.verdict, "functional": f, "point": u, "etas": rep.etas,
            "maxima": rep.maxima, "lower_bound": rep.lower_bound, "budget": rep.budget,
            "witness": not rep.exposes}


def _run_theorem2(ctx, params, seed):
    x = _need_x(ctx, "theorem2")
    rep = theorem2_convergence_experiment(
        x, ctx.K, ctx.norm, cfg=ctx.cfg, length=int(params.get("length", 64)), seed=seed,
        spread_tol=ctx.config.tolerance("spread"),
        frechet_kwargs={"direction_budget": ctx.budget(200 if ctx.K.dim <= 3 else 1000)},
        exposure_kwargs={"budget": ctx.budget(64)})
    per = {name: {"limit": p["limit"], "tail_diameter": p["tail_diameter"],
                  "final_value": p["final_value"], "values": p["sequence"].values}
           for name, p in rep["per_strategy"].items()}
    hyp = {name: {"passed": h["passed"]} for name, h in rep["hypotheses"].items()}
    return {"status": rep["status"], "hypotheses_met": rep["hypotheses_met"],
            "failing_checks": rep["failing_checks"], "hypotheses": hyp, "per_strategy": per,
            "limit_spread": rep["limit_spread"], "max_tail_diameter": rep["max_tail_diameter"],
            "converged": rep["converged"], "distance": rep["distance"], "target": rep["distance"],
            "passed": rep["consistent"], "witness": not rep["converged"]}


def _run_lipschitz(ctx, params, seed):
    K = ctx.member(params["member"]) if ctx.family is not None else ctx.K
    rep = lipschitz_check(K, ctx.norm, ctx.budget(int(params.get("pairs", 1000))), seed, ctx.cfg)
    limit = 1.0 + ctx.config.tolerance("lipschitz")
    return {"set_dim": K.dim, "max_ratio": rep.max_ratio, "bound": rep.bound, "pairs": rep.pairs,
            "skipped": rep.skipped, "ray_max_ratio": rep.ray_max_ratio,
            "ray_min_ratio": rep.ray_min_ratio, "limit": limit,
            "passed": bool(rep.passed and rep.max_ratio <= limit)}


def _run_convexity(ctx, params, seed):
    norms = params.get("norms") or [ctx.config.norm]
    dim = int(params.get("dim", 2))
    epsilons = params.get("epsilons", [])
    budget = ctx.budget(int(params.get("budget", 2000)))
    rows = []
    for spec in norms:
        n = Norm.from_spec(spec)
        v = strict_convexity_probe(n, dim, sampler_seed=seed, budget=budget)
        mods = []
        for eps in epsilons:
            m = modulus_of_convexity(n, dim, eps, budget=budget, seed=seed)
            mods.append({"epsilon": eps, "delta": m.delta_estimate})
        rows.append({"norm": spec, "verdict": v.verdict, "witness_pair": v.witness,
                     "best_midpoint_norm": v.best_midpoint_norm, "modulus": mods})
    return {"dim": dim, "budget": budget, "rows": rows,
            "witness": any(r["verdict"] == "Witness" for r in rows)}


def _run_crossval(ctx, params, seed):
    methods = params.get("methods", ["exact", "frank_wolfe", "subgradient"])
    if ctx.family is not None:
        cap = int(params.get("max_size", 64))
        cases = [(K.dim, ctx.x_of(K), K) for K in ctx.family if K.dim <= cap]
    else:
        if not ctx.K.convex:
            return {"status": "not_applicable", "reason": "set is not convex"}
        cases = [(0, _need_x(ctx, "crossval"), ctx.K)]
    rows, worst = [], 0.0
    for key, x, K in cases:
        vals = {}
        for m in methods:
            vals[m] = distance(x, K, ctx.norm, replace(ctx.cfg, method=m)).distance
        spread = max(vals.values()) - min(vals.values())
        worst = max(worst, spread)
        rows.append({"key": key, "values": vals, "spread": spread})
    limit = ctx.config.tolerance("crossval")
    return {"rows": rows, "max_spread": worst, "limit": limit, "passed": worst <= limit}


def _run_grid(ctx, params, seed):
    if ctx.family is not None:
        K = ctx.member(params.get("member", 2))
        pts = [ctx.x_of(K)]
    else:
        K = ctx.K
        pts = [ctx.x] if ctx.x is not None else []
        if isinstance(ctx.probes_spec, list):
            pts += [p for p in ctx.probes(seed) if ctx.x is None or not np.array_equal(p, ctx.x)]
    if K.dim != 2:
        return {"status": "not_applicable", "reason": "grid oracle is two-dimensional"}
    rows = []
    for p in pts:
        g, step, _ = grid_oracle(p, K, ctx.norm, cells=int(params.get("cells", 400)))
        d = distance(p, K, ctx.norm, ctx.cfg).distance
        rows.append({"point": p, "solver": d, "grid": g, "step": step,
                     "steps_apart": abs(g - d) / step})
    return {"rows": rows, "passed": all(r["steps_apart"] <= 2.0 for r in rows)}


def _run_continuity(ctx, params, seed):
    x = _need_x(ctx, "continuity")
    rep = projection_continuity_probe(ctx.K, ctx.norm, x, float(params.get("radius", 0.1)),
                                      ctx.budget(int(params.get("count", 64))), seed, ctx.cfg)
    out = {"modulus_estimate": rep.modulus_estimate, "center_singleton": rep.center_singleton,
           "discontinuity_witness": rep.discontinuity_witness, "probe_count": rep.probe_count,
           "witness": rep.discontinuity_witness is not None}
    if rep.modulus_estimate is not None and ctx.norm.euclidean_type and ctx.K.convex:
        out["passed"] = rep.modulus_estimate <= 1.0 + 1e-6
    if not rep.center_singleton:
        out["note"] = "projection at the center is not a singleton"
    return out


def _run_compactness(ctx, params, seed):
    if ctx.family is not None:
        seqs = [truncation_family_sequence(ctx.x_of, ctx.family, ctx.norm, ctx.cfg)]
        x = np.zeros(ctx.family[-1].dim)
        K = ctx.family[-1]
    else:
        x, K = _need_x(ctx, "compactness"), ctx.K
        strategies = params.get("strategies", ["SolverIterates", "RandomizedDescent", "Adversarial"])
        seqs = [minimizing_sequence(x, K, ctx.norm, s, int(params.get("length", 64)), seed + i,
                                    ctx.cfg) for i, s in enumerate(strategies)]
    rep = approximative_compactness_probe(K, ctx.norm, x, seqs)
    rows = [{"strategy": p["strategy"], "converges": p["converges"], "min_tail_gap": p["min_tail_gap"],
             "limit": p["limit"], "limit_is_best_approximation": p["limit_is_best_approximation"]}
            for p in rep.per_sequence]
    return {"verdict": rep.verdict, "rows": rows, "witness": rep.verdict == "FailureWitness"}


RUNNERS = {
    "distance": _run_distance, "best_approximations": _run_best_approximations,
    "chebyshev": _run_chebyshev, "lemma1": _run_lemma1, "frechet": _run_frechet,
    "exposure": _run_exposure, "theorem2": _run_theorem2, "lipschitz": _run_lipschitz,
    "convexity": _run_convexity, "crossval": _run_crossval, "grid": _run_grid,
    "continuity": _run_continuity, "compactness": _run_compactness,
}


@dataclass
class RunReport:
    scenario: str
    seed: int
    budget_scale: float
    tolerance: float
    checks: dict
    wall_clock: dict
    config: dict
    version: str = __version__

    @property
    def unexpected_witnesses(self):
        expected = set(self.config.get("expect_witness") or [])
        return [cid for cid, r in self.checks.items()
                if r.get("witness") and r["check"] not in expected]

    @property
    def missing_witnesses(self):
        found = {r["check"] for r in self.checks.values() if r.get("witness")}
        return [w for w in self.config.get("expect_witness") or [] if w not in found]

    @property
    def failed_checks(self):
        return [cid for cid, r in self.checks.items()
                if r.get("status") == "error" or r.get("passed") is False]

    @property
    def exit_code(self):
        bad = self.unexpected_witnesses or self.missing_witnesses or self.failed_checks
        return 1 if bad else 0

    def to_dict(self, include_clock=True):
        out = {"artifact_version": self.version, "scenario": self.scenario, "seed": self.seed,
               "budget_scale": self.budget_scale, "tolerance": self.tolerance,
               "config": self.config, "checks": self.checks,
               "summary": {"exit_code": self.exit_code,
                           "unexpected_witnesses": self.unexpected_witnesses,
                           "missing_witnesses": self.missing_witnesses,
                           "failed_checks": self.failed_checks}}
        if include_clock:
            out["wall_clock"] = self.wall_clock
        return out

    def to_json(self, include_clock=True):
        return json.dumps(self.to_dict(include_clock), indent=1) + "\n"

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(scenario=data["scenario"], seed=data["seed"],
                       budget_scale=data["budget_scale"], tolerance=data["tolerance"],
                       checks=data["checks"], wall_clock=data.get("wall_clock", {}),
                       config=data["config"], version=data.get("artifact_version", __version__))
        except (KeyError, TypeError) as exc:
            raise ConfigError("report", f"not a run report: {exc}") from exc

    @classmethod
    def load(cls, path):
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError("report", f"not valid JSON: {exc}") from exc


def run_scenario(config, seed=0, budget_scale=1.0, tolerance=None, out=None):
    """Run every check of ``config`` in order; failures are recorded, not raised.

    Configuration problems (bad norm, set or point) raise ConfigError before
    any check runs.  The report is written to ``out`` (or ``config.output``)
    when a path is given.
    """
    if isinstance(config, str):
        config = builtin_config(config)
    if not budget_scale > 0:
        raise ConfigError("budget_scale", "must be > 0")
    ctx = _Context(config, seed, budget_scale, tolerance)
    results, clock = {}, {}
    start = time.perf_counter()
    for i, chk in enumerate(config.checks):
        name = chk["name"]
        cid = name if name not in results else f"{name}#{i}"
        s = check_seed(seed, i)
        t0 = time.perf_counter()
        try:
            res = RUNNERS[name](ctx, chk["params"], s)
            res.setdefault("status", "ok")
        except ConfigError:
            raise
        except Exception as exc:  # noqa: BLE001 -- recorded in the report
            res = {"status": "error", "error": f"{type(exc).__name__}: {exc}"}
        res.setdefault("witness", False)
        res.setdefault("passed", None)
        res.update({"check": name, "seed": s, "params": chk["params"]})
        results[cid] = _plain(res)
        clock[cid] = time.perf_counter() - t0
    clock["total"] = time.perf_counter() - start
    report = RunReport(config.name, int(seed), float(budget_scale), ctx.cfg.tolerance, results,
                       clock, _plain(config.to_mapping()))
    path = out or config.output
    if path:
        try:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            Path(path).write_text(report.to_json())
        except OSError as exc:
            raise ConfigError("output", f"cannot write report: {exc}") from exc
    return report


# -- tables -------------------------------------------------------------------------

_TABLE_DOC = [
    "# columns: check = check id; series = quantity; key = index (size, eps, step, ...);",
    "# value = the number plotted; aux = companion number (gap, bound, threshold) or empty",
]


def _table_rows(cid, r):
    name = r.get("check", cid)
    if r.get("status") not in (None, "ok"):
        return
    if name == "distance" and "verdict" in r:
        for row in r["rows"]:
            yield cid, "trend", row["size"], row["distance"], row["min_gap_to_smaller"]
    elif name == "distance":
        for i, row in enumerate(r["rows"]):
            yield cid, "distance", i, row["distance"], row["residual"]
    elif name == "best_approximations":
        for i, row in enumerate(r["rows"]):
            yield cid, "cluster_diameter", i, row["cluster_diameter"], row["cluster_count"]
    elif name == "chebyshev":
        for i, row in enumerate(r["per_point"]):
            yield cid, "probe", i, row["distance"], row["cluster_diameter"]
    elif name == "lemma1":
        for i, v in enumerate(r["residuals"]):
            yield cid, "residual", i, v, r["threshold"]
    elif name == "frechet":
        for eps, delta, res in zip(r["epsilon_grid"], r["deltas"], r["residuals"]):
            yield cid, "delta", eps, delta, res
    elif name == "exposure":
        for eta, m in zip(r["etas"], r["maxima"]):
            yield cid, "max_gap", eta, m, None
    elif name == "theorem2":
        for strat, p in r["per_strategy"].items():
            for n, v in enumerate(p["values"]):
                yield cid, strat, n, v - r["target"], p["tail_diameter"]
    elif name == "lipschitz":
        yield cid, "max_ratio", r["pairs"], r["max_ratio"], r["bound"]
    elif name == "convexity":
        for row in r["rows"]:
            label = json.dumps(row["norm"], sort_keys=True)
            yield cid, f"midpoint {label}", r["dim"], row["best_midpoint_norm"], None
            for m in row["modulus"]:
                yield cid, f"modulus {label}", m["epsilon"], m["delta"], None
    elif name == "crossval":
        for row in r["rows"]:
            for m, v in row["values"].items():
                yield cid, m, row["key"], v, row["spread"]
    elif name == "grid":
        for i, row in enumerate(r["rows"]):
            yield cid, "grid", i, row["grid"], row["solver"]
    elif name == "continuity":
        w = r["discontinuity_witness"]
        yield cid, "modulus", r["probe_count"], r["modulus_estimate"], w["jump"] if w else None
    elif name == "compactness":
        for row in r["rows"]:
            yield cid, row["strategy"], "min_tail_gap", row["min_tail_gap"], int(row["converges"])


def emit_table(report, fmt="csv", path=None):
    """Render a report as a delimited table or as the full nested document."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {sorted(FORMATS)}")
    if isinstance(report, dict):
        report = RunReport.from_dict(report)
    if FORMATS[fmt] == "json":
        text = report.to_json()
    else:
        buf = io.StringIO()
        buf.write("\n".join(_TABLE_DOC) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for cid, r in report.checks.items():
            for row in _table_rows(cid, r):
                w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v)
                            for v in row])
        text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text

