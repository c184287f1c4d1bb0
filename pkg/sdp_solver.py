"""
Step 1 of the iteration: find a sparse outlier indicator h in [0, 1]^n with

    lambda_max( sum_i (1 - h_i)(y_i - x)(y_i - x)^T ) <= bound

while keeping sum_i u_i h_i small.

The solver works on w = 1 - h. Each sweep takes the top eigenvector v of the
weighted covariance and shrinks w_i in proportion to its share of the
variance along v, w_i * <y_i - x, v>^2 / u_i. The sweep that crosses the bound
is bisected so the bound is met tightly, and a support refit restores
lightly touched points to full weight afterwards.
"""

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from config import debug
from errors import ContractViolation, ParameterError
from linalg_core import (
    DEFAULT_TOL,
    as_point_set,
    as_unit_interval,
    as_vector,
    feasibility_residual,
    top_eigenpair,
)

DEFAULT_TOL_FEAS = 1e-3
DEFAULT_MAX_SWEEPS = 200
DEFAULT_ETA = 0.5
DEFAULT_RW_DELTA = 1e-2
DEFAULT_RW_ROUNDS = 10
DEFAULT_RESTORE_LEVEL = 0.5
DEFAULT_POLISH_ROUNDS = 3
SUPPORT_FRACTIONS = (0.5, 0.75, 0.9)

BISECTION_STEPS = 50
BRUTE_FORCE_CHUNK = 200_000
BRUTE_FORCE_MAX_HEADS = 21**5


@dataclass(frozen=True)
class StepProblem:
    points: np.ndarray
    center: np.ndarray
    bound: float
    u: np.ndarray = None

    def __post_init__(self):
        Y = as_point_set(self.points)
        n, d = Y.shape
        object.__setattr__(self, "points", Y)
        object.__setattr__(self, "center", as_vector(self.center, d, "center"))
        if not self.bound > 0:
            raise ContractViolation(f"bound must be positive, got {self.bound}")
        u = np.ones(n) if self.u is None else as_vector(self.u, n, "u")
        if np.any(u <= 0):
            raise ContractViolation("reweighting vector u must be strictly positive")
        object.__setattr__(self, "u", u)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def Z(self):
        return self.points - self.center


@dataclass(frozen=True)
class StepSolution:
    h: np.ndarray
    weighted_l1: float
    residual: float
    sweeps: int
    feasible: bool
    history: list = field(default_factory=list)
    rounds: int = 1


def lp_objective(h, p):
    """sum_i h_i^p; for p = 0 the number of nonzero entries."""
    h = np.asarray(h, dtype=np.float64)
    if p < 0:
        raise ParameterError(f"p must be non-negative, got {p}")
    if p == 0:
        return float(np.count_nonzero(h))
    return float(np.sum(h**p))


def is_feasible_pair(points, h, x, bound, binary=False, tol=DEFAULT_TOL_FEAS):
    """
    (h, x) is feasible for the l0 problem (binary=True: h in {0,1}^n) or for
    its box / lp relaxations (binary=False: h in [0,1]^n).
    """
    Y = as_point_set(points)
    try:
        h = as_unit_interval(h, Y.shape[0], "h")
    except ContractViolation:
        return False
    if binary and not np.all((h == 0.0) | (h == 1.0)):
        return False
    return feasibility_residual(Y, h, x, bound) <= tol


def _bisect_step(Z, w, step, bound, tol_feas, spectral_tol, v0):
    """Largest fraction s of `step` (w <- w * (1 - s * step)) whose lambda_max lies in [bound(1 - tol_feas), bound]."""
    lo, hi = 0.0, 1.0
    best = None
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        candidate = w * (1.0 - mid * step)
        res = top_eigenpair(Z, candidate, spectral_tol, v0=v0)
        if res.value > bound:
            lo = mid
        else:
            hi, best = mid, (candidate, res)
            if res.value >= bound * (1.0 - tol_feas):
                break
    if best is None:
        candidate = w * (1.0 - hi * step)
        best = (candidate, top_eigenpair(Z, candidate, spectral_tol, v0=v0))
    return best


def _down_weight(Z, w, u, bound, eta, tol_feas, max_sweeps, spectral_tol, movable=None):
    """Sweeps from w until lambda_max <= bound; only points in `movable` (default all) lose weight."""
    res = top_eigenpair(Z, w, spectral_tol)
    history = [res.value]
    sweeps = 0
    while res.value > bound and sweeps < max_sweeps:
        proj = Z @ res.vector
        scores = w * proj**2 / u
        if movable is not None:
            scores = np.where(movable, scores, 0.0)
        top = scores.max()
        if top <= 0.0:
            break
        step = eta * scores / top
        nxt_w = w * (1.0 - step)
        nxt = top_eigenpair(Z, nxt_w, spectral_tol, v0=res.vector)
        if nxt.value < bound * (1.0 - tol_feas):
            nxt_w, nxt = _bisect_step(Z, w, step, bound, tol_feas, spectral_tol, res.vector)
        w, res = nxt_w, nxt
        sweeps += 1
        history.append(res.value)
    return w, res.value, sweeps, history


def _support_levels(h, restore_level):
    """restore_level plus fixed fractions of max(h), ascending, each strictly below max(h)."""
    top = float(h.max()) if h.size else 0.0
    levels = {float(restore_level)} | {top * f for f in SUPPORT_FRACTIONS}
    return sorted(level for level in levels if 0.0 <= level < top)


def solve_step1(
    prob,
    tol_feas=DEFAULT_TOL_FEAS,
    max_sweeps=DEFAULT_MAX_SWEEPS,
    eta=DEFAULT_ETA,
    spectral_tol=DEFAULT_TOL,
    h0=None,
    restore_level=DEFAULT_RESTORE_LEVEL,
    polish_rounds=DEFAULT_POLISH_ROUNDS,
):
    """
    Soft spectral down-weighting for the weighted l1 Step-1 problem.

    h0 warm-starts the search: entries above restore_level are kept, the rest
    start from zero. On running out of sweeps the last iterate is returned
    with feasible=False.
    """
    if not tol_feas > 0:
        raise ContractViolation(f"tol_feas must be positive, got {tol_feas}")
    if not 0.0 < eta < 1.0:
        raise ContractViolation(f"eta must lie in (0, 1), got {eta}")
    if int(max_sweeps) < 0:
        raise ContractViolation(f"max_sweeps must be non-negative, got {max_sweeps}")

    Z, u, bound = prob.Z, prob.u, prob.bound
    w = np.ones(prob.n)
    if h0 is not None:
        h0 = as_unit_interval(h0, prob.n, "h0")
        w = np.where(h0 > restore_level, 1.0 - h0, 1.0)

    w, lam, sweeps, history = _down_weight(Z, w, u, bound, eta, tol_feas, int(max_sweeps), spectral_tol)
    feasible = lam / bound - 1.0 <= tol_feas

    if feasible:
        # support refit: points below a support level go back to full weight,
        # then either the kept support alone or every point is swept again
        objective = float(u @ (1.0 - w))
        for refit in range(int(polish_rounds)):
            best = None
            for level in _support_levels(1.0 - w, restore_level):
                support = 1.0 - w > level
                restored = np.where(support, w, 1.0)
                if np.array_equal(restored, w):
                    continue
                masks = [None]
                if support.any() and top_eigenpair(Z, np.where(support, 0.0, 1.0), spectral_tol).value <= bound:
                    masks.insert(0, support)
                for movable in masks:
                    w2, lam2, sweeps2, history2 = _down_weight(Z, restored, u, bound, eta, tol_feas,
                                                               int(max_sweeps), spectral_tol, movable)
                    sweeps += sweeps2
                    objective2 = float(u @ (1.0 - w2))
                    if lam2 / bound - 1.0 <= tol_feas and objective2 < objective and (
                            best is None or objective2 < best[2]):
                        best = (w2, lam2, objective2, history2)
            if best is None:
                debug(f"step1 refit {refit + 1}: no improvement on objective {objective:.4g}")
                break
            w, lam, objective, history = best

    h = np.clip(1.0 - w, 0.0, 1.0)
    residual = lam / bound - 1.0
    debug(f"step1: {sweeps} sweeps, residual={residual:.3g}, |h|_1={h.sum():.4g}")
    return StepSolution(
        h=h,
        weighted_l1=float(u @ h),
        residual=float(residual),
        sweeps=sweeps,
        feasible=bool(residual <= tol_feas),
        history=history,
    )


def reweight_lp(h_prev, p, delta=DEFAULT_RW_DELTA):
    """u_i = (h_i + delta)^(p - 1), scaled so that max u_i = 1."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0, 1) for reweighting, got {p}")
    if not delta > 0.0:
        raise ParameterError(f"delta must be positive, got {delta}")
    u = (np.asarray(h_prev, dtype=np.float64) + delta) ** (p - 1.0)
    return u / u.max()


def solve_step1_lp(prob, p, rw_rounds=DEFAULT_RW_ROUNDS, rw_delta=DEFAULT_RW_DELTA, **solver_kw):
    """
    Reweighted-l1 outer loop for the lp objective, 0 < p < 1.

    Round k solves the weighted l1 problem with u from round k-1's h, warm
    started at that h. A round is kept only if it stays feasible and does not
    increase sum h_i^p.
    """
    if p == 1:
        return solve_step1(prob, **solver_kw)
    if int(rw_rounds) < 1:
        raise ContractViolation(f"rw_rounds must be at least 1, got {rw_rounds}")

    sol = solve_step1(prob, **solver_kw)
    rounds = 1
    for _ in range(int(rw_rounds) - 1):
        if not sol.feasible:
            break
        u = reweight_lp(sol.h, p, rw_delta)
        nxt = solve_step1(replace(prob, u=u), h0=sol.h, **solver_kw)
        if not nxt.feasible or lp_objective(nxt.h, p) > lp_objective(sol.h, p) + 1e-12:
            break
        rounds += 1
        change = float(np.max(np.abs(nxt.h - sol.h)))
        sol = nxt
        if change <= solver_kw.get("tol_feas", DEFAULT_TOL_FEAS):
            break
    debug(f"reweighted l{p}: {rounds} round(s), sum h^p={lp_objective(sol.h, p):.4g}")
    return replace(sol, rounds=rounds)


def _batch_lambda(Z, W):
    """lambda_max for a batch of weight rows W (k x n) and d <= 2, in closed form."""
    if Z.shape[1] == 1:
        return W @ (Z[:, 0] ** 2)
    a = W @ (Z[:, 0] ** 2)
    b = W @ (Z[:, 0] * Z[:, 1])
    c = W @ (Z[:, 1] ** 2)
    return 0.5 * (a + c) + np.sqrt((0.5 * (a - c)) ** 2 + b**2)


def brute_force_step1(prob, grid_steps=20):
    """
    Exhaustive search over the grid {0, 1/g, ..., 1}^n for tiny instances
    (n <= 6, d <= 2). Test oracle only.

    lambda_max only falls when any h_i grows, so for each setting of the first
    n - 1 coordinates the last one is the smallest feasible grid value, found
    by bisection.
    """
    n, d = prob.points.shape
    if n > 6 or d > 2:
        raise ContractViolation(f"brute force is limited to n <= 6 and d <= 2, got n={n}, d={d}")
    g = int(grid_steps)
    if g < 1:
        raise ContractViolation(f"grid_steps must be at least 1, got {grid_steps}")
    if (g + 1) ** (n - 1) > BRUTE_FORCE_MAX_HEADS:
        raise ContractViolation(f"grid of {g + 1}^{n - 1} points is too large for brute force")
    Z, u, bound = prob.Z, prob.u, prob.bound
    limit = bound * (1.0 + 1e-12)

    best_obj, best_h = np.inf, None
    heads = itertools.product(range(g + 1), repeat=n - 1)
    while True:
        chunk = list(itertools.islice(heads, BRUTE_FORCE_CHUNK))
        if not chunk:
            break
        H = np.zeros((len(chunk), n))
        if n > 1:
            H[:, :-1] = np.asarray(chunk, dtype=np.float64) / g

        def feasible_at(k):
            H[:, -1] = k / g
            return _batch_lambda(Z, 1.0 - H) <= limit

        # invariant: hi is feasible, lo is not (-1 stands for "below the grid")
        hi = np.full(len(chunk), g)
        ok = feasible_at(hi)
        lo = np.full(len(chunk), -1)
        while np.any(hi - lo > 1):
            active = hi - lo > 1
            mid = np.where(active, (lo + hi) // 2, hi)
            f = feasible_at(mid)
            hi = np.where(active & f, mid, hi)
            lo = np.where(active & ~f, mid, lo)
        H[:, -1] = hi / g
        obj = np.where(ok, H @ u, np.inf)
        i = int(np.argmin(obj))
        if obj[i] < best_obj:
            best_obj, best_h = float(obj[i]), H[i].copy()

    lam = float(_batch_lambda(Z, (1.0 - best_h)[None, :])[0])
    return StepSolution(
        h=best_h,
        weighted_l1=best_obj,
        residual=lam / bound - 1.0,
        sweeps=0,
        feasible=True,
    )
