"""
Robust mean estimation by iterated lp minimisation and thresholding, with the
baselines it is benchmarked against.

run_algorithm1 alternates two steps starting from the coordinate-wise median:
Step 1 finds a sparse outlier indicator h under the spectral bound
(c1^2 + c2^2) sigma^2 n around the current estimate, Step 2 re-estimates the
mean from the points with h_i <= tau weighted by 1 - h_i. c2 follows the
contraction c2 <- gamma c2 + beta until the schedule length is reached or c2
stops decreasing.
"""

import math
import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator

from config import debug, warn
from errors import ContractViolation, EmptySupportError, ParameterError
from linalg_core import DEFAULT_TOL, as_point_set, as_unit_interval, top_eigenpair
from sdp_solver import (
    DEFAULT_ETA,
    DEFAULT_MAX_SWEEPS,
    DEFAULT_POLISH_ROUNDS,
    DEFAULT_RESTORE_LEVEL,
    DEFAULT_RW_DELTA,
    DEFAULT_RW_ROUNDS,
    DEFAULT_TOL_FEAS,
    StepProblem,
    solve_step1,
    solve_step1_lp,
)
import theory

EPS_CHECK_MARGIN = 1e-3


class TerminatedBy(str, Enum):
    MAX_T = "max_T"
    C2_NON_DECREASE = "c2_non_decrease"
    SOLVER_FAILURE = "solver_failure"
    EMPTY_SUPPORT = "empty_support"


@dataclass(frozen=True)
class AlgoConfig:
    p: float = 1.0
    tau: float = 0.6
    c1: float = theory.DEFAULT_C1
    sigma: float = 1.0
    eps_check: float = None
    final_threshold: float = None
    c2_init: float = None
    tol_feas: float = DEFAULT_TOL_FEAS
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    eta: float = DEFAULT_ETA
    rw_delta: float = DEFAULT_RW_DELTA
    rw_rounds: int = DEFAULT_RW_ROUNDS
    spectral_tol: float = DEFAULT_TOL
    restore_level: float = DEFAULT_RESTORE_LEVEL
    polish_rounds: int = DEFAULT_POLISH_ROUNDS
    allow_theory_violation: bool = False

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ParameterError(f"p must lie in (0, 1], got {self.p}")
        if not 0.0 < self.tau <= 1.0:
            raise ParameterError(f"tau must lie in (0, 1], got {self.tau}")
        if not self.c1 > 1.0:
            raise ParameterError(f"c1 must exceed 1, got {self.c1}")
        if not self.sigma > 0.0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if self.final_threshold is not None and not 0.0 < self.final_threshold <= 1.0:
            raise ParameterError(f"final_threshold must lie in (0, 1], got {self.final_threshold}")
        if self.c2_init is not None and not self.c2_init > 0.0:
            raise ParameterError(f"c2_init must be positive, got {self.c2_init}")

        f = theory.f_tau(self.tau)
        if self.eps_check is None:
            object.__setattr__(self, "eps_check", f - EPS_CHECK_MARGIN)
        theory.gamma(self.eps_check, self.tau)  # raises outside the recursion's domain
        if self.eps_check >= f:
            msg = f"eps_check={self.eps_check} is not below the breakdown point f({self.tau})={f:.6f}"
            if not self.allow_theory_violation:
                raise ParameterError(msg)
            warn(f"{msg}; running a single iteration")

    @property
    def theory_violated(self):
        return self.eps_check >= theory.f_tau(self.tau)

    def c2_0(self, d):
        if self.c2_init is not None:
            return float(self.c2_init)
        return 3.0 * math.sqrt(d) + 2.0 * self.c1

    def solver_kwargs(self):
        return {
            "tol_feas": self.tol_feas,
            "max_sweeps": self.max_sweeps,
            "eta": self.eta,
            "spectral_tol": self.spectral_tol,
            "restore_level": self.restore_level,
            "polish_rounds": self.polish_rounds,
        }


@dataclass(frozen=True)
class Iterate:
    t: int
    x: np.ndarray
    c2: float
    step1_l1: float
    residual: float


@dataclass
class AlgoTrace:
    iterates: list
    final_x: np.ndarray
    final_h: np.ndarray
    terminated_by: TerminatedBy
    schedule_T: int = 1
    meta: dict = field(default_factory=dict)

    @property
    def iterations(self):
        return len(self.iterates) - 1

    @property
    def c2_trace(self):
        return [it.c2 for it in self.iterates]

    def h_support_size(self, atol=1e-9):
        return int(np.count_nonzero(self.final_h > atol))

    def excluded(self, tau):
        return int(np.count_nonzero(self.final_h > tau))


def coordinate_wise_median(points):
    return np.median(as_point_set(points), axis=0)


def sample_mean(points):
    return as_point_set(points).mean(axis=0)


def _step2_weights(h, tau):
    return (1.0 - h) * (h <= tau)


def retained_mass(h, tau):
    """sum_i (1 - h_i) 1{h_i <= tau}."""
    h = np.asarray(h, dtype=np.float64)
    return float(_step2_weights(h, tau).sum())


def step2_update(points, h, tau):
    """Weighted mean of the points with h_i <= tau, weights 1 - h_i."""
    Y = as_point_set(points)
    h = as_unit_interval(h, Y.shape[0], "h")
    if not 0.0 < tau <= 1.0:
        raise ParameterError(f"tau must lie in (0, 1], got {tau}")
    weights = _step2_weights(h, tau)
    mass = weights.sum()
    if mass <= 0.0:
        raise EmptySupportError(f"no point has h_i <= {tau} with positive weight")
    return weights @ Y / mass


def run_algorithm1(points, cfg):
    """Run the iteration from the coordinate-wise median and return its trace."""
    Y = as_point_set(points)
    n, d = Y.shape
    sigma_sq_n = cfg.sigma**2 * n

    x = coordinate_wise_median(Y)
    c2 = cfg.c2_0(d)
    if cfg.theory_violated:
        T = 1
    else:
        T = theory.schedule_T(c2, cfg.eps_check, cfg.tau, cfg.c1)
    debug(f"algorithm: n={n} d={d} p={cfg.p} tau={cfg.tau} eps_check={cfg.eps_check:.4g} c2_0={c2:.4g} T={T}")

    iterates = [Iterate(0, x, c2, 0.0, math.nan)]
    h = np.zeros(n)
    terminated = TerminatedBy.MAX_T
    bound = math.nan
    for t in range(T):
        bound = (cfg.c1**2 + c2**2) * sigma_sq_n
        prob = StepProblem(Y, x, bound)
        if cfg.p < 1.0:
            sol = solve_step1_lp(prob, cfg.p, rw_rounds=cfg.rw_rounds, rw_delta=cfg.rw_delta, **cfg.solver_kwargs())
        else:
            sol = solve_step1(prob, **cfg.solver_kwargs())
        if not sol.feasible:
            debug(f"iteration {t + 1}: step 1 infeasible after {sol.sweeps} sweeps (residual={sol.residual:.3g})")
            terminated = TerminatedBy.SOLVER_FAILURE
            break
        try:
            x_next = step2_update(Y, sol.h, cfg.tau)
        except EmptySupportError:
            terminated = TerminatedBy.EMPTY_SUPPORT
            break
        x, h = x_next, sol.h
        c2_next = theory.next_c2(c2, cfg.eps_check, cfg.tau, cfg.c1)
        iterates.append(Iterate(t + 1, x, c2_next, sol.weighted_l1, sol.residual))
        debug(f"iteration {t + 1}: |h|_1={sol.weighted_l1:.4g} excluded={int(np.sum(sol.h > cfg.tau))} c2={c2_next:.4g}")
        if t + 1 >= T:
            break
        if not c2_next < c2:
            terminated = TerminatedBy.C2_NON_DECREASE
            break
        c2 = c2_next

    final_x = x
    applied = False
    if cfg.final_threshold is not None:
        if retained_mass(h, cfg.final_threshold) > 0.0:
            final_x = step2_update(Y, h, cfg.final_threshold)
            applied = True
        else:
            warn(f"final threshold {cfg.final_threshold} retains no mass, keeping the last iterate")
    meta = {
        "n": n,
        "d": d,
        "sigma": float(cfg.sigma),
        "c2_0": float(iterates[0].c2),
        "bound": float(bound),
        "final_threshold_applied": applied,
    }
    return AlgoTrace(iterates, final_x, h, terminated, schedule_T=T, meta=meta)


def simple_filter_baseline(points, sigma, c=theory.DEFAULT_C1, max_rounds=None):
    """
    Spectral filter that removes one point per round: while the top eigenvalue
    of the scatter around the current mean exceeds c^2 sigma^2 (active count),
    drop the point with the largest squared projection on its eigenvector.
    """
    Y = as_point_set(points)
    n = Y.shape[0]
    if not c > 1.0:
        raise ParameterError(f"c must exceed 1, got {c}")
    if not sigma > 0.0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    max_rounds = n if max_rounds is None else int(max_rounds)

    active = np.ones(n, dtype=bool)
    for removed in range(max_rounds + 1):
        if not active.any():
            warn("simple filter removed every point, falling back to the coordinate-wise median")
            return coordinate_wise_median(Y)
        mean = Y[active].mean(axis=0)
        Z = Y - mean
        res = top_eigenpair(Z, active.astype(np.float64))
        if res.value <= c**2 * sigma**2 * active.sum() or removed == max_rounds:
            debug(f"simple filter: removed {removed} point(s)")
            return mean
        scores = np.where(active, (Z @ res.vector) ** 2, -np.inf)
        active[int(np.argmax(scores))] = False


def recovery_error(estimate, sample):
    """l2 distance to the oracle mean (average of the untouched points)."""
    estimate = np.asarray(estimate, dtype=np.float64)
    if estimate.shape != sample.oracle_mean.shape:
        raise ContractViolation(f"estimate has shape {estimate.shape}, oracle {sample.oracle_mean.shape}")
    return float(np.linalg.norm(estimate - sample.oracle_mean))


# ---------------- scikit-learn style estimators ----------------

class LpMeanEstimator(BaseEstimator):
    """lp-minimisation mean estimator; p=1 is the l1 estimator."""

    def __init__(self, p=1.0, tau=0.6, c1=theory.DEFAULT_C1, sigma=1.0, eps_check=None,
                 final_threshold=None, c2_init=None, tol_feas=DEFAULT_TOL_FEAS,
                 max_sweeps=DEFAULT_MAX_SWEEPS, eta=DEFAULT_ETA, rw_delta=DEFAULT_RW_DELTA,
                 rw_rounds=DEFAULT_RW_ROUNDS, spectral_tol=DEFAULT_TOL,
                 restore_level=DEFAULT_RESTORE_LEVEL, polish_rounds=DEFAULT_POLISH_ROUNDS,
                 allow_theory_violation=False):
        self.p = p
        self.tau = tau
        self.c1 = c1
        self.sigma = sigma
        self.eps_check = eps_check
        self.final_threshold = final_threshold
        self.c2_init = c2_init
        self.tol_feas = tol_feas
        self.max_sweeps = max_sweeps
        self.eta = eta
        self.rw_delta = rw_delta
        self.rw_rounds = rw_rounds
        self.spectral_tol = spectral_tol
        self.restore_level = restore_level
        self.polish_rounds = polish_rounds
        self.allow_theory_violation = allow_theory_violation

    @classmethod
    def from_config(cls, cfg, **overrides):
        params = {name: getattr(cfg, name) for name in cls._get_param_names()}
        params.update(overrides)
        return cls(**params)

    def to_config(self):
        return AlgoConfig(**self.get_params())

    def fit(self, X, y=None):
        self.trace_ = run_algorithm1(X, self.to_config())
        self.location_ = self.trace_.final_x
        self.h_ = self.trace_.final_h
        self.n_iter_ = self.trace_.iterations
        self.terminated_by_ = self.trace_.terminated_by.value
        return self


class CoordinateMedianEstimator(BaseEstimator):
    def fit(self, X, y=None):
        self.location_ = coordinate_wise_median(X)
        self.n_iter_ = 0
        self.terminated_by_ = None
        return self


class SampleMeanEstimator(BaseEstimator):
    def fit(self, X, y=None):
        self.location_ = sample_mean(X)
        self.n_iter_ = 0
        self.terminated_by_ = None
        return self


class SimpleFilterEstimator(BaseEstimator):
    def __init__(self, sigma=1.0, c=theory.DEFAULT_C1, max_rounds=None):
        self.sigma = sigma
        self.c = c
        self.max_rounds = max_rounds

    def fit(self, X, y=None):
        self.location_ = simple_filter_baseline(X, self.sigma, self.c, self.max_rounds)
        self.n_iter_ = 0
        self.terminated_by_ = None
        return self


ESTIMATOR_TAGS = ("l1", "lp(p)", "median", "mean", "simple_filter")
_LP_TAG = re.compile(r"^lp\(\s*([0-9.eE+-]+)\s*\)$")


def parse_tag(tag):
    """Normalise an estimator tag; returns (kind, p)."""
    tag = tag.strip().lower()
    if tag == "l1":
        return "lp", 1.0
    m = _LP_TAG.match(tag)
    if m:
        try:
            p = float(m.group(1))
        except ValueError:
            raise ParameterError(f"bad exponent in estimator tag {tag!r}") from None
        if not 0.0 < p <= 1.0:
            raise ParameterError(f"lp exponent must lie in (0, 1], got {p}")
        return "lp", p
    if tag in ("median", "mean", "simple_filter"):
        return tag, None
    raise ParameterError(f"unknown estimator tag {tag!r} (expected one of {', '.join(ESTIMATOR_TAGS)})")


def make_estimator(tag, cfg):
    """Build the estimator for a tag; lp estimators take every setting from cfg except p."""
    kind, p = parse_tag(tag)
    if kind == "lp":
        return LpMeanEstimator.from_config(cfg, p=p)
    if kind == "median":
        return CoordinateMedianEstimator()
    if kind == "mean":
        return SampleMeanEstimator()
    return SimpleFilterEstimator(sigma=cfg.sigma, c=cfg.c1)
