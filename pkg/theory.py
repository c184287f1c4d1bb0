"""
Closed-form constants, the c2 schedule and the iterate error bound.

All logarithms are natural. Domain violations raise ParameterError instead
of being clamped; only the bound evaluation degrades to +inf with a flag,
because it is used for report annotation.
"""

import math
from dataclasses import dataclass

from errors import ParameterError

DEFAULT_C1 = 1.1


def f_tau(tau):
    """Breakdown point of the thresholded iteration for threshold tau in (0, 1]."""
    if not 0.0 < tau <= 1.0:
        raise ParameterError(f"tau must lie in (0, 1], got {tau}")
    root = math.sqrt(tau**4 + 2.0 * tau**3 + 5.0 * tau**2)
    return (3.0 * tau + tau**2 - root) / (2.0 * (1.0 + tau))


def _check_eps(eps, tau):
    if not 0.0 < tau <= 1.0:
        raise ParameterError(f"tau must lie in (0, 1], got {tau}")
    if eps < 0.0:
        raise ParameterError(f"eps must be non-negative, got {eps}")
    r = eps / tau
    if r >= 1.0 or eps + r >= 1.0:
        raise ParameterError(f"eps={eps} is outside the domain for tau={tau} (need eps + eps/tau < 1)")
    return r


def gamma(eps, tau):
    """Contraction factor of the c2 recursion."""
    r = _check_eps(eps, tau)
    return math.sqrt(r / ((1.0 - r) * (1.0 - eps - r)))


def beta(eps, tau, c1):
    """Additive term of the c2 recursion."""
    r = _check_eps(eps, tau)
    if c1 <= 0.0:
        raise ParameterError(f"c1 must be positive, got {c1}")
    return c1 * ((1.0 - r) ** -0.5 + (1.0 - eps) ** -0.5) * math.sqrt(r / (1.0 - eps - r))


def fixed_point(eps_check, tau, c1):
    """beta / (1 - gamma): the level the c2 recursion contracts to."""
    g = gamma(eps_check, tau)
    if g >= 1.0:
        return math.inf
    return beta(eps_check, tau, c1) / (1.0 - g)


def next_c2(c2, eps_check, tau, c1):
    return gamma(eps_check, tau) * c2 + beta(eps_check, tau, c1)


def schedule_T(c2_0, eps_check, tau, c1=DEFAULT_C1):
    """
    Number of iterations of the c2 schedule.

    ceil(1 + ln c2_0 / |ln gamma|) when c2_0 is at least the recursion's fixed
    point, 1 otherwise. Never less than 1.
    """
    if not c2_0 > 0.0:
        raise ParameterError(f"c2_0 must be positive, got {c2_0}")
    if eps_check >= f_tau(tau):
        raise ParameterError(f"eps_check={eps_check} must be below f(tau)={f_tau(tau):.6f}")
    if c2_0 < fixed_point(eps_check, tau, c1):
        return 1
    g = gamma(eps_check, tau)
    if g == 0.0:
        return 1
    return max(1, math.ceil(1.0 + math.log(c2_0) / abs(math.log(g))))


@dataclass(frozen=True)
class TheoryParams:
    n: int
    d: int
    delta: float
    c1: float
    sigma: float
    eps: float
    tau: float

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ParameterError(f"n and d must be positive, got n={self.n}, d={self.d}")
        if not 0.0 < self.delta < 0.25:
            raise ParameterError(f"delta must lie in (0, 1/4), got {self.delta}")
        if not self.c1 > 1.0:
            raise ParameterError(f"c1 must exceed 1, got {self.c1}")
        if not self.sigma > 0.0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if not 0.0 < self.tau <= 1.0:
            raise ParameterError(f"tau must lie in (0, 1], got {self.tau}")

    @property
    def c1_prime(self):
        c1_sq = self.c1**2
        return c1_sq * min(c1_sq * math.log(c1_sq) + 1.0 - c1_sq, 1.0)

    @property
    def log_term(self):
        return math.log(self.d / self.delta)

    @property
    def alpha(self):
        return math.e * self.d * self.log_term / (self.n * self.delta**2 * self.c1_prime)

    @property
    def eps_prime(self):
        return self.eps + self.alpha


@dataclass(frozen=True)
class BoundResult:
    value: float
    vacuous: bool


def _additive_terms(params):
    alpha, eps = params.alpha, params.eps
    tail = params.c1 * params.sigma * math.sqrt(eps / ((1.0 - alpha) * (1.0 - eps)))
    sampling = params.sigma * math.sqrt(alpha * params.delta) * (
        1.0 + 2.0 * math.sqrt(params.c1_prime / (math.e * params.log_term))
    )
    return tail + sampling


def _bound_domain_ok(params, eps_check):
    try:
        f = f_tau(params.tau)
    except ParameterError:
        return False
    return (
        params.c1_prime > 0.0
        and params.log_term > 0.0
        and 0.0 <= params.alpha < 1.0
        and 0.0 <= params.eps < 1.0
        and params.eps_prime <= eps_check < f
    )


def _recursion_terms(params, eps_check):
    tau, c1 = params.tau, params.c1
    return (
        gamma(eps_check, tau),
        beta(eps_check, tau, c1),
        gamma(params.eps_prime, tau),
        beta(params.eps_prime, tau, c1),
    )


def thm3_bound(params, eps_check, t, c2_0):
    """
    Right-hand side of the iterate error bound at iteration t >= 1.

    Returns BoundResult(inf, vacuous=True) when the constants leave the
    region where the bound is stated.
    """
    if t < 1:
        raise ParameterError(f"t must be at least 1, got {t}")
    if not _bound_domain_ok(params, eps_check):
        return BoundResult(math.inf, True)
    g_check, b_check, g_prime, b_prime = _recursion_terms(params, eps_check)
    decay = g_check ** (t - 1)
    geometric = (1.0 - decay) / (1.0 - g_check) * b_check
    value = params.sigma * (g_prime * (c2_0 * decay + geometric) + b_prime) + _additive_terms(params)
    return BoundResult(value, False)


def thm3_final_bound(params, eps_check):
    """Bound reached at the end of the schedule, once gamma(eps_check)^(T-1) c2_0 <= 1."""
    if not _bound_domain_ok(params, eps_check):
        return BoundResult(math.inf, True)
    g_check, b_check, g_prime, b_prime = _recursion_terms(params, eps_check)
    value = params.sigma * (g_prime * (1.0 + b_check / (1.0 - g_check)) + b_prime) + _additive_terms(params)
    return BoundResult(value, False)
