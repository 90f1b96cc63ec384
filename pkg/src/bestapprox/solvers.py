"""Low-level nearest-point solvers.

Each solver returns ``(y, value, info)`` where ``info`` is a dict with at
least ``iterations``, ``residual`` (a certified optimality gap when the
method provides one, else ``None``) and ``converged``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import sparse
from scipy.optimize import linprog, minimize, minimize_scalar

from .errors import UnsupportedVariant
from .sets import NormBall, Polytope

LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


# -- helpers ----------------------------------------------------------------


def project_simplex(v):
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.count_nonzero(u - css / ind > 0)
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def vertex_distances(K, x, norm, chunk=256):
    """||x - v_i|| for every vertex, chunked so sparse hulls stay cheap."""
    if not K.is_sparse:
        return np.asarray(norm(K.vertices - x))
    out = np.empty(K.n_vertices)
    for i in range(0, K.n_vertices, chunk):
        block = K.vertices[i:i + chunk].toarray()
        out[i:i + chunk] = norm(block - x)
    return out


def _euclid_weights(norm, n):
    if norm.weights is not None:
        return norm.weights
    return np.ones(n)


# -- Wolfe's minimum-norm-point algorithm (exact route for l2 on polytopes) --


def _affine_minimizer(Q):
    k = len(Q)
    G = Q @ Q.T
    A = np.zeros((k + 1, k + 1))
    A[:k, :k] = G
    A[:k, k] = 1.0
    A[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
    alpha = sol[:k]
    return alpha / alpha.sum()


def min_norm_point(P, tol=1e-15, max_iter=1000):
    """Point of minimum Euclidean norm in conv(rows of P).

    Returns ``(point, weights, iterations, gap)`` where ``gap`` is the final
    ``||x||^2 - min_j <p_j, x>`` (zero at the exact solution).
    """
    P = np.asarray(P, dtype=float)
    m = len(P)
    sq = np.einsum("ij,ij->i", P, P)
    scale = max(float(sq.max()), 1e-300)
    S = [int(np.argmin(sq))]
    w = np.array([1.0])
    x = P[S[0]].copy()
    gap = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        dots = P @ x
        j = int(np.argmin(dots))
        gap = float(x @ x - dots[j])
        if gap <= tol * scale or j in S:
            break
        S.append(j)
        w = np.append(w, 0.0)
        while True:
            alpha = _affine_minimizer(P[S])
            if np.all(alpha > 1e-15):
                w = alpha
                break
            neg = alpha <= 1e-15
            denom = w[neg] - alpha[neg]
            ratios = np.where(denom > 0, w[neg] / np.where(denom > 0, denom, 1.0), np.inf)
            theta = min(1.0, float(np.min(ratios)))
            w = (1 - theta) * w + theta * alpha
            keep = w > 1e-15
            if keep.all():
                keep[int(np.argmin(w))] = False
            S = [s for s, k in zip(S, keep) if k]
            w = w[keep]
            w = w / w.sum()
        x = w @ P[S]
    weights = np.zeros(m)
    weights[S] = w
    return x, weights, it, max(gap, 0.0)


def mnp_distance(x, K, norm):
    """Exact l2 (optionally weighted) projection onto a polytope."""
    W = np.sqrt(_euclid_weights(norm, K.dim))
    P = (K.dense_vertices() - x) * W
    z, lam, it, gap = min_norm_point(P)
    y = K.combine(lam)
    value = norm(x - y)
    # ||z||^2 - min <p_j, z> bounds ||z|| - d from above after dividing by ||z||
    resid = gap / value if value > 0 else 0.0
    return y, value, {"iterations": it, "residual": resid, "converged": True, "weights": lam}


# -- linear programming route (polyhedral norms) -----------------------------


def _epigraph_rows(norm, M, offset, n_vars, col0):
    """Rows expressing ``||M z - offset||`` through auxiliary variables.

    Returns ``(A_ub, b_ub, aux_obj, n_aux)``; the norm equals ``aux_obj @ aux``
    at any optimum.  ``M`` is (n, n_vars) sparse, aux columns start at col0.
    """
    n = M.shape[0]
    if norm.kind == "lp":  # weighted l1
        w = _euclid_weights(norm, n)
        I = sparse.identity(n, format="csr")
        pad = sparse.csr_matrix((n, col0 - n_vars)) if col0 > n_vars else None
        left = sparse.hstack([M, pad]) if pad is not None else M
        A = sparse.vstack([sparse.hstack([left, -I]), sparse.hstack([-left, -I])])
        b = np.concatenate([offset, -offset])
        return A, b, w, n
    if norm.kind == "sup":
        G = sparse.diags(_euclid_weights(norm, n))
    else:
        G = sparse.csr_matrix(norm.functionals)
    L = G @ M
    off = G @ offset
    k = L.shape[0]
    ones = sparse.csr_matrix(np.ones((k, 1)))
    pad = sparse.csr_matrix((k, col0 - n_vars)) if col0 > n_vars else None
    left = sparse.hstack([L, pad]) if pad is not None else L
    A = sparse.vstack([sparse.hstack([left, -ones]), sparse.hstack([-left, -ones])])
    b = np.concatenate([off, -off])
    return A, b, np.ones(1), 1


class _LPModel:
    """Feasible region K plus the epigraph of ``||x - y||`` as LP rows."""

    def __init__(self, x, K, norm):
        self.K = K
        n = K.dim
        if isinstance(K, Polytope):
            m = K.n_vertices
            self.M = sparse.csr_matrix(K.vertices.T)
            self.n_base = m
            self.base_bounds = [(0, None)] * m
            self.A_eq = sparse.csr_matrix(np.ones((1, m)))
            self.b_eq = np.ones(1)
            extra_A, extra_b, n_ball = None, None, 0
        elif isinstance(K, NormBall) and K.norm.polyhedral_type:
            self.M = sparse.identity(n, format="csr")
            self.n_base = n
            self.base_bounds = [(None, None)] * n
            self.A_eq, self.b_eq = None, None
            extra_A, extra_b, ball_obj, n_ball = _epigraph_rows(K.norm, self.M, K.center, n, n)
        else:
            raise UnsupportedVariant("LP route needs a polytope or a polyhedral-norm ball")
        col0 = self.n_base + n_ball
        A, b, obj, n_aux = _epigraph_rows(norm, self.M, x, self.n_base, col0)
        if n_ball:
            # ball aux columns sit between the base and the distance aux block
            extra_A = sparse.hstack([extra_A, sparse.csr_matrix((extra_A.shape[0], n_aux))])
            A = sparse.vstack([extra_A, A])
            b = np.concatenate([extra_b, b])
            ball_row = sparse.hstack([sparse.csr_matrix((1, self.n_base)),
                                      sparse.csr_matrix(ball_obj[None, :]),
                                      sparse.csr_matrix((1, n_aux))])
            A = sparse.vstack([A, ball_row])
            b = np.append(b, K.radius)
        # rows of the distance epigraph, whose right-hand side is [Gx, -Gx]
        n_extra = extra_A.shape[0] if n_ball else 0
        self._rows = slice(n_extra, n_extra + A.shape[0] - n_extra - (1 if n_ball else 0))
        if norm.kind == "lp":
            self._G = sparse.identity(n, format="csr")
        elif norm.kind == "sup":
            self._G = sparse.diags(_euclid_weights(norm, n)).tocsr()
        else:
            self._G = sparse.csr_matrix(norm.functionals)
        self.n_vars = col0 + n_aux
        self.A_ub, self.b_ub = sparse.csr_matrix(A), b
        self.obj = np.zeros(self.n_vars)
        self.obj[col0:] = obj
        self.bounds = self.base_bounds + [(0, None)] * (n_ball + n_aux)
        if self.A_eq is not None:
            self.A_eq = sparse.hstack([self.A_eq, sparse.csr_matrix((1, self.n_vars - self.n_base))])

    def rebase(self, x):
        """Reuse the model for another base point."""
        gx = np.asarray(self._G @ x).ravel()
        self.b_ub = self.b_ub.copy()
        self.b_ub[self._rows] = np.concatenate([gx, -gx])
        return self

    @classmethod
    def cached(cls, x, K, norm):
        store = K.__dict__.setdefault("_lp_models", {})
        model = store.get(norm)
        if model is None:
            model = store[norm] = cls(x, K, norm)
            return model
        return model.rebase(x)

    def point(self, z):
        return np.asarray(self.M @ z[:self.n_base]).ravel()

    def solve(self, c, extra_row=None, extra_rhs=None):
        A, b = self.A_ub, self.b_ub
        if extra_row is not None:
            A = sparse.vstack([A, sparse.csr_matrix(extra_row[None, :])])
            b = np.append(b, extra_rhs)
        return linprog(c, A_ub=A, b_ub=b, A_eq=self.A_eq, b_eq=self.b_eq, bounds=self.bounds,
                       method="highs", options=LP_OPTIONS)


def segment_distance(x, K, norm):
    """Exact distance to a segment under a polyhedral norm.

    ``t -> ||r - t e||`` is piecewise linear on [0, 1], so its minimum sits
    at an endpoint or a breakpoint; every breakpoint is enumerated.
    """
    a = K.vertex(0)
    e = K.vertex(1) - a
    r = x - a
    n = a.size
    if norm.kind == "lp":
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = r / e
    else:
        G = _euclid_weights(norm, n)[:, None] * np.eye(n) if norm.kind == "sup" else norm.functionals
        A = np.vstack([G, -G])
        # crossings of the affine pieces A_i (r - t e)
        p, q = A @ r, A @ e
        i, j = np.triu_indices(len(A), k=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = (p[i] - p[j]) / (q[i] - q[j])
    cand = cand[np.isfinite(cand) & (cand > 0.0) & (cand < 1.0)]
    t = np.unique(np.concatenate([[0.0, 1.0], cand]))
    vals = np.asarray(norm(r[None, :] - t[:, None] * e[None, :]))
    k = int(np.argmin(vals))
    return a + t[k] * e, float(vals[k]), {"iterations": len(t), "residual": 0.0, "converged": True}


def lp_distance(x, K, norm):
    model = _LPModel.cached(x, K, norm)
    res = model.solve(model.obj)
    if res.status != 0:
        raise RuntimeError(f"LP failed: {res.message}")
    y = model.point(res.x)
    value = norm(x - y)
    return y, value, {"iterations": int(getattr(res, "nit", 0)), "residual": abs(value - res.fun),
                      "converged": True, "model": model}


def lp_extremes(x, K, norm, level, directions):
    """Extreme points of ``K ∩ B[x; level]`` along each direction."""
    model = _LPModel.cached(x, K, norm)
    M = model.M
    out = []
    for g in directions:
        c = np.zeros(model.n_vars)
        c[:model.n_base] = -np.asarray(M.T @ g).ravel()
        res = model.solve(c, model.obj, level)
        if res.status == 0:
            out.append(model.point(res.x))
    return out


# -- Frank-Wolfe with away steps ---------------------------------------------


def _line_search(phi, gmax, quadratic=None):
    if quadratic is not None:
        a, b = quadratic  # phi^2 along the ray is a*g^2 + 2*b*g + const
        g = -b / a if a > 0 else gmax
        return float(min(max(g, 0.0), gmax))
    res = minimize_scalar(phi, bounds=(0.0, gmax), method="bounded",
                          options={"xatol": 1e-14 * max(gmax, 1.0)})
    cands = [(phi(0.0), 0.0), (phi(gmax), gmax), (float(res.fun), float(res.x))]
    return min(cands)[1]


def frank_wolfe(x, K, norm, tol=1e-10, max_iter=20000, start=None, record=False):
    """Away-step Frank-Wolfe for min ||x - y|| over a polytope or norm ball.

    The objective is minimized through (sub)gradients of the norm and an
    exact line search; the Frank-Wolfe gap certifies ``value - d_K(x)``.
    For norm balls only plain Frank-Wolfe steps are available.
    """
    is_poly = isinstance(K, Polytope)
    if not is_poly and not isinstance(K, NormBall):
        raise UnsupportedVariant("Frank-Wolfe needs a polytope or a norm ball")
    W = _euclid_weights(norm, K.dim) if norm.euclidean_type else None

    if is_poly:
        if start is None:
            start = int(np.argmin(vertex_distances(K, x, norm)))
        active = {int(start): 1.0}
        y = K.vertex(int(start))
    else:
        y = K.center.copy() if start is None else np.asarray(start, dtype=float)

    value = norm(x - y)
    trace = [y.copy()] if record else None
    gap = math.inf
    stall = 0
    it = 0
    for it in range(1, max_iter + 1):
        r = y - x
        if value == 0.0:
            gap = 0.0
            break
        g = norm.subgradient(r)
        if is_poly:
            sc = K.scores(g)
            s_idx = int(np.argmin(sc))
            gy = float(g @ y)
            gap = gy - sc[s_idx]
            a_idx = max(active, key=lambda i: (sc[i], -i))
            away_gap = sc[a_idx] - gy
        else:
            s = K.lmo(g)
            gap = float(g @ (y - s))
            away_gap = -math.inf
        if gap <= tol:
            break
        if gap >= away_gap:
            direction = (K.vertex(s_idx) if is_poly else s) - y
            gmax = 1.0
            fw_step = True
        else:
            wa = active[a_idx]
            direction = y - K.vertex(a_idx)
            gmax = wa / (1.0 - wa) if wa < 1.0 else 0.0
            fw_step = False
        quad = None
        if W is not None:
            quad = (float(np.sum(W * direction * direction)), float(np.sum(W * r * direction)))
        gamma = _line_search(lambda t: norm(x - y - t * direction), gmax, quad)
        new_y = y + gamma * direction
        new_value = norm(x - new_y)
        if new_value >= value - 1e-16 * (1.0 + value):
            stall += 1
            if stall >= 5:
                break
        else:
            stall = 0
        if new_value > value:
            continue
        if is_poly and gamma > 0:
            if fw_step:
                for i in active:
                    active[i] *= 1.0 - gamma
                active[s_idx] = active.get(s_idx, 0.0) + gamma
            else:
                for i in active:
                    active[i] *= 1.0 + gamma
                active[a_idx] -= gamma
            active = {i: w for i, w in active.items() if w > 1e-15}
        y, value = new_y, new_value
        if record:
            trace.append(y.copy())
    info = {"iterations": it, "residual": max(gap, 0.0), "converged": gap <= tol}
    if record:
        info["trace"] = trace
    return y, value, info


# -- projected subgradient / accelerated gradient over the weight simplex ----


def _lipschitz_estimate(K, W, iters=100, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(K.n_vertices)
    lam = 0.0
    for _ in range(iters):
        u = np.asarray(K.vertices @ (W * np.asarray(K.vertices.T @ v).ravel())).ravel()
        lam = float(np.linalg.norm(u))
        if lam == 0.0:
            return 1.0
        v = u / lam
    return lam


def _kelley(x, K, norm, cuts, best_lam, best_val, tol, max_cuts):
    """Cutting-plane model min_lam max_j f_j + <g_j, lam - lam_j> over the simplex.

    For polyhedral norms the objective is piecewise linear, so the model
    becomes exact after finitely many cuts.  Returns the best point and a
    certified lower bound.
    """
    m = K.n_vertices
    lower = -math.inf
    it = 0
    for it in range(max_cuts):
        G = np.array([g for _, _, g in cuts])
        rhs = np.array([g @ lam_j - f for lam_j, f, g in cuts])
        A = np.hstack([G, -np.ones((len(cuts), 1))])
        c = np.zeros(m + 1)
        c[-1] = 1.0
        res = linprog(c, A_ub=A, b_ub=rhs, A_eq=np.concatenate([np.ones(m), [0.0]])[None, :],
                      b_eq=[1.0], bounds=[(0, None)] * m + [(None, None)], method="highs")
        if res.status != 0:
            break
        lower = max(lower, float(res.fun))
        lam = np.clip(res.x[:m], 0.0, None)
        lam /= lam.sum()
        r = K.combine(lam) - x
        val = float(norm(r))
        if val < best_val:
            best_lam, best_val = lam, val
        if best_val - lower <= tol:
            break
        cuts.append((lam, val, np.asarray(K.vertices @ norm.subgradient(r)).ravel()))
    return best_lam, best_val, lower, it


def projected_subgradient(x, K, norm, tol=1e-10, max_iter=20000, record=False, warmup=300,
                          max_cuts=2000):
    """Minimize ``||x - V^T lam||`` over the simplex of vertex weights.

    For (weighted) Euclidean norms the squared objective has a Lipschitz
    gradient, so accelerated projected gradient steps with restart are
    used, and the Frank-Wolfe gap at the returned point is the certificate.
    Otherwise ``warmup`` normalized subgradient steps ``sqrt(2/k)`` are
    taken and the subgradients they collect seed a cutting-plane model,
    refined until its lower bound meets the best value found.
    """
    if isinstance(K, NormBall):
        return _ball_subgradient(x, K, norm, tol, max_iter, record)
    if not isinstance(K, Polytope):
        raise UnsupportedVariant("the subgradient route handles polytopes and balls")
    m = K.n_vertices
    lam = np.full(m, 1.0 / m)
    trace = [] if record else None
    smooth = norm.euclidean_type
    if smooth:
        W = _euclid_weights(norm, K.dim)
        L = _lipschitz_estimate(K, W) * 1.01
        z = lam.copy()
        t = 1.0
        f_prev = math.inf
    best_lam, best_val = lam.copy(), norm(x - K.combine(lam))
    cuts = []
    it = 0
    for it in range(1, (max_iter if smooth else min(max_iter, warmup)) + 1):
        if smooth:
            r = K.combine(z) - x
            grad = np.asarray(K.vertices @ (W * r)).ravel()
            new_lam = project_simplex(z - grad / L)
            t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
            z = new_lam + ((t - 1) / t_new) * (new_lam - lam)
            val = norm(x - K.combine(new_lam))
            if val > f_prev:
                # adaptive restart
                z, t_new = new_lam.copy(), 1.0
            moved = float(np.max(np.abs(new_lam - lam)))
            lam, t, f_prev = new_lam, t_new, val
            if moved < 1e-16:
                break
        else:
            r = K.combine(lam) - x
            val = float(norm(r))
            g = np.asarray(K.vertices @ norm.subgradient(r)).ravel()
            cuts.append((lam.copy(), val, g))
            gn = float(np.linalg.norm(g))
            if gn == 0.0:
                break
            lam = project_simplex(lam - (math.sqrt(2.0) / math.sqrt(it)) * g / gn)
            val = norm(x - K.combine(lam))
        if val < best_val:
            best_lam, best_val = lam.copy(), val
        if record:
            trace.append(K.combine(lam))
        if smooth and it % 50 == 0:
            y = K.combine(best_lam)
            gvec = norm.subgradient(y - x)
            gap = float(gvec @ y - np.min(K.scores(gvec)))
            if gap <= tol:
                break
    if smooth:
        y = K.combine(best_lam)
        gvec = norm.subgradient(y - x)
        gap = max(float(gvec @ y - np.min(K.scores(gvec))), 0.0) if best_val > 0 else 0.0
    else:
        best_lam, best_val, lower, extra = _kelley(x, K, norm, cuts, best_lam, best_val, tol,
                                                   max_cuts)
        it += extra
        y = K.combine(best_lam)
        gap = max(best_val - lower, 0.0)
        if record:
            trace.append(y)
    info = {"iterations": it, "residual": gap, "converged": gap <= tol}
    if record:
        info["trace"] = trace
    return y, float(best_val), info


def euclidean_ball_projection(v, K):
    """Euclidean projection onto an unweighted l1, l2 or sup ball."""
    bn = K.norm
    if bn.weights is not None or not (bn.kind == "sup" or (bn.kind == "lp" and bn.p in (1, 2))):
        raise UnsupportedVariant(f"no Euclidean projection onto a ball of {bn!r}")
    r = v - K.center
    if bn(r) <= K.radius:
        return v.copy()
    if bn.kind == "sup":
        return K.center + np.clip(r, -K.radius, K.radius)
    if bn.p == 2:
        return K.center + K.radius * r / bn(r)
    # l1 ball: project |r| onto the scaled simplex
    a = project_simplex(np.abs(r) / K.radius) * K.radius
    return K.center + np.sign(r) * a


def _ball_subgradient(x, K, norm, tol, max_iter, record):
    # projected gradient steps in y-space; normalized subgradient steps
    # with the best iterate kept when the norm is not Euclidean
    smooth = norm.euclidean_type
    W = _euclid_weights(norm, K.dim) if smooth else None
    L = float(np.max(W)) if smooth else 1.0
    y = K.center.copy()
    best_y, best_val = y.copy(), float(norm(x - y))
    trace = [] if record else None
    R = 2.0 * K.radius * max(1.0, float(np.max(np.abs(K.bounds()[1] - K.center))))
    it = 0
    for it in range(1, max_iter + 1):
        if smooth:
            new = euclidean_ball_projection(y - W * (y - x) / L, K)
        else:
            g = norm.subgradient(y - x)
            gn = float(np.linalg.norm(g))
            if gn == 0.0:
                break
            new = euclidean_ball_projection(y - R / math.sqrt(it) * g / gn, K)
        moved = float(np.max(np.abs(new - y)))
        y = new
        val = float(norm(x - y))
        if val < best_val:
            best_y, best_val = y.copy(), val
        if record:
            trace.append(y.copy())
        if moved < 1e-16:
            break
    gvec = norm.subgradient(best_y - x)
    gap = max(float(gvec @ best_y - gvec @ K.lmo(gvec)), 0.0) if best_val > 0 else 0.0
    info = {"iterations": it, "residual": gap, "converged": gap <= tol}
    if record:
        info["trace"] = trace
    return best_y, best_val, info


# -- closed forms and local solvers ---------------------------------------------


def ball_closed_form(x, K, norm):
    """Radial projection onto a ball of the ambient norm."""
    diff = x - K.center
    nd = norm(diff)
    if nd <= K.radius:
        return x.copy(), 0.0, {"iterations": 0, "residual": 0.0, "converged": True}
    y = K.center + K.radius * diff / nd
    return y, norm(x - y), {"iterations": 0, "residual": abs(norm(x - y) - (nd - K.radius)),
                            "converged": True}


def curve_search(x, K, norm, max_refine=32):
    """Grid scan plus bounded Brent refinement around the best local minima."""
    t = K.param_grid()
    P = K.points(t)
    vals = np.asarray(norm(x - P))
    steps = np.asarray(norm(np.diff(np.vstack([P, P[:1]]) if K.closed else P, axis=0)))
    slack = float(np.max(steps))
    h = t[1] - t[0]
    if K.closed:
        left, right = np.roll(vals, 1), np.roll(vals, -1)
    else:
        left = np.concatenate([[np.inf], vals[:-1]])
        right = np.concatenate([vals[1:], [np.inf]])
    loc = np.flatnonzero((vals <= left) & (vals <= right) & (vals <= vals.min() + slack))
    loc = loc[np.argsort(vals[loc], kind="stable")][:max_refine]

    def along(s):
        return float(norm(x - K.points([K.wrap(s)])[0]))

    refined = []
    for i in loc:
        lo, hi = t[i] - h, t[i] + h
        if not K.closed:
            lo, hi = max(lo, K.t_min), min(hi, K.t_max)
        res = minimize_scalar(along, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        s, v = K.wrap(float(res.x)), float(res.fun)
        if vals[i] <= v:
            s, v = float(t[i]), float(vals[i])
        refined.append((s, v))
    s_best, v_best = min(refined, key=lambda p: p[1])
    info = {"iterations": len(t), "residual": None, "converged": True, "grid": (t, P, vals),
            "refined": refined, "slack": slack}
    return K.points([s_best])[0], v_best, info


def sublevel_solve(x, K, norm, starts=4, seed=0):
    """SLSQP on min ||x - y|| subject to g(y) <= level inside the box."""
    lo, hi = K.bounds()
    if K.contains(x):
        return x.copy(), 0.0, {"iterations": 0, "residual": 0.0, "converged": True}
    rng = np.random.default_rng(seed)
    c = K.interior_point()
    inits = [c] + K.sample_boundary(starts, int(rng.integers(2**63)))
    cons = [{"type": "ineq", "fun": lambda y: K.level - K.g(y)}]
    if norm.euclidean_type:
        W = _euclid_weights(norm, K.dim)

        def obj(y):
            return 0.5 * float(np.sum(W * (x - y) ** 2))
    else:

        def obj(y):
            return norm(x - y)
    best = None
    nit = 0
    for y0 in inits:
        res = minimize(obj, y0, method="SLSQP", bounds=list(zip(lo, hi)), constraints=cons,
                       options={"ftol": 1e-15, "maxiter": 500})
        nit += int(res.nit)
        y = np.clip(res.x, lo, hi)
        # pull infeasible solver output back along the ray to the interior point
        if K.g(y) > K.level:
            a, b = 0.0, 1.0
            for _ in range(80):
                mid = 0.5 * (a + b)
                if K.g(c + mid * (y - c)) <= K.level:
                    a = mid
                else:
                    b = mid
            y = c + a * (y - c)
        v = norm(x - y)
        if best is None or v < best[1]:
            best = (y, v)
    return best[0], best[1], {"iterations": nit, "residual": None, "converged": True}
