"""
Matrix-free spectral primitives over weighted, centered point sets.

Every operator here is  A(w, c) = sum_i w_i (y_i - c)(y_i - c)^T  applied as
Z^T (w * (Z v)) with Z = Y - c, so nothing d x d is ever built and each
application costs O(nd).
"""

from dataclasses import dataclass

import numpy as np
from sklearn.utils import check_array

from config import debug
from errors import ContractViolation

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 1000
NULL_SPACE_RTOL = 1e-14


@dataclass(frozen=True)
class SpectralResult:
    value: float
    vector: np.ndarray
    iterations: int
    converged: bool


def as_point_set(points):
    """Validate an n x d matrix of finite observations and return it as float64."""
    try:
        return check_array(points, dtype=np.float64)
    except ValueError as e:
        raise ContractViolation(f"invalid point set: {e}") from e


def as_unit_interval(values, n, name="w"):
    """Validate a length-n vector with entries in [0, 1] (weights or outlier indicators)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ContractViolation(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{name} contains non-finite entries")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ContractViolation(f"{name} entries must lie in [0, 1]")
    return arr


def as_vector(values, d, name="vector"):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != d:
        raise ContractViolation(f"{name} must have shape ({d},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{name} contains non-finite entries")
    return arr


def centered(points, center):
    """Return Z = Y - center after checking that the dimensions agree."""
    Y = as_point_set(points)
    c = as_vector(center, Y.shape[1], "center")
    return Y - c


def _apply(Z, w, v):
    return Z.T @ (w * (Z @ v))


def apply_weighted_cov(points, w, center, v):
    """Return sum_i w_i (y_i - center) <y_i - center, v> without forming the d x d matrix."""
    Z = centered(points, center)
    n, d = Z.shape
    w = as_unit_interval(w, n, "w")
    v = as_vector(v, d, "v")
    return _apply(Z, w, v)


def _start_vectors(Z, w, v0):
    d = Z.shape[1]
    if v0 is not None:
        yield np.asarray(v0, dtype=np.float64)
    yield np.ones(d)
    yield np.arange(1.0, d + 1.0)
    # the axis with the largest diagonal entry is never in the null space of a nonzero operator
    diag = w @ (Z * Z)
    axis = np.zeros(d)
    axis[int(np.argmax(diag))] = 1.0
    yield axis


def top_eigenpair(Z, w, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, v0=None):
    """
    Power iteration on an already centered matrix Z with weights w.

    Stops when the Rayleigh quotient changes by at most tol (relative) between
    sweeps. On hitting max_iters the best iterate is returned with
    converged=False and the caller decides what to do with it.
    """
    d = Z.shape[1]
    scale = float(w @ np.einsum("ij,ij->i", Z, Z))  # trace of the operator
    if scale <= 0.0:
        return SpectralResult(0.0, np.ones(d) / np.sqrt(d), 0, True)

    v = Av = None
    for candidate in _start_vectors(Z, w, v0):
        norm = np.linalg.norm(candidate)
        if norm == 0.0:
            continue
        v = candidate / norm
        Av = _apply(Z, w, v)
        if np.linalg.norm(Av) >= NULL_SPACE_RTOL * scale:
            break
        debug("power iteration: start vector in null space, trying next fallback")
    rho_prev = float(v @ Av)

    for iteration in range(1, max_iters + 1):
        norm = np.linalg.norm(Av)
        if norm == 0.0:
            return SpectralResult(0.0, v, iteration, True)
        v = Av / norm
        Av = _apply(Z, w, v)
        rho = float(v @ Av)
        if abs(rho - rho_prev) <= tol * abs(rho):
            return SpectralResult(max(rho, 0.0), v, iteration, True)
        rho_prev = rho

    debug(f"power iteration did not converge in {max_iters} sweeps (rho={rho_prev:.6g})")
    return SpectralResult(max(rho_prev, 0.0), v, max_iters, False)


def lambda_max(points, w, center, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, v0=None):
    """Top eigenpair of sum_i w_i (y_i - center)(y_i - center)^T."""
    if not tol > 0:
        raise ContractViolation(f"tol must be positive, got {tol}")
    if int(max_iters) < 1:
        raise ContractViolation(f"max_iters must be at least 1, got {max_iters}")
    Z = centered(points, center)
    w = as_unit_interval(w, Z.shape[0], "w")
    if v0 is not None:
        v0 = as_vector(v0, Z.shape[1], "v0")
    return top_eigenpair(Z, w, tol, int(max_iters), v0)


def feasibility_residual(points, h, center, bound, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """
    lambda_max(sum (1 - h_i)(y_i - c)(y_i - c)^T) / bound - 1.

    Zero or negative means the spectral constraint holds.
    """
    if not bound > 0:
        raise ContractViolation(f"bound must be positive, got {bound}")
    Y = as_point_set(points)
    h = as_unit_interval(h, Y.shape[0], "h")
    result = lambda_max(Y, 1.0 - h, center, tol, max_iters)
    return result.value / bound - 1.0


def empirical_sigma(points, tol=DEFAULT_TOL):
    """sqrt of the spectral norm of the sample covariance (1/n, around the sample mean)."""
    Y = as_point_set(points)
    n = Y.shape[0]
    result = lambda_max(Y, np.full(n, 1.0 / n), Y.mean(axis=0), tol=tol)
    return float(np.sqrt(result.value))
