"""
Synthetic corrupted samples for the benchmark settings.

Every generator draws inliers first, then hands them to corrupt() together with
the replacement rows, so the oracle mean (average of the untouched rows) is
always recomputed in one place.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from errors import ContractViolation, ParameterError
from linalg_core import as_point_set, empirical_sigma

SIGMA_MODES = ("empirical", "theoretical")


@dataclass(frozen=True)
class LabeledSample:
    points: np.ndarray
    inlier_mask: np.ndarray
    oracle_mean: np.ndarray
    true_mean: np.ndarray
    epsilon: float
    theoretical_sigma: float = math.nan
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    @property
    def corrupted_indices(self):
        return np.flatnonzero(~self.inlier_mask)


def trial_rng(seed, k=0):
    """Generator for trial k, derived from the master seed alone (independent of scheduling)."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(k),)))


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return trial_rng(seed, 0)


def _check_eps(eps):
    if not 0.0 <= eps < 0.5:
        raise ParameterError(f"eps must lie in [0, 1/2), got {eps}")


def corrupted_count(n, eps):
    """round(eps * n), halves rounded up."""
    _check_eps(eps)
    k = int(math.floor(eps * n + 0.5))
    if 2 * k >= n and k > 0:
        raise ParameterError(f"eps={eps} corrupts {k} of {n} rows; outliers must stay a strict minority")
    return k


def corrupt(points, indices, replacements, true_mean=None, theoretical_sigma=math.nan, meta=None):
    """
    Replace the rows at `indices` with `replacements`.

    Fewer than half of the rows may be replaced. true_mean defaults to the mean
    of the uncorrupted input.
    """
    Y = as_point_set(points).copy()
    n, d = Y.shape
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    R = np.asarray(replacements, dtype=np.float64).reshape(-1, d) if idx.size else np.empty((0, d))
    if R.shape[0] != idx.size:
        raise ContractViolation(f"{idx.size} indices but {R.shape[0]} replacement rows")
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ContractViolation(f"corruption index out of range for n={n}")
    if np.unique(idx).size != idx.size:
        raise ContractViolation("corruption indices must be distinct")
    if 2 * idx.size >= n and idx.size > 0:
        raise ContractViolation(f"cannot replace {idx.size} of {n} rows (must be fewer than half)")

    mu = Y.mean(axis=0) if true_mean is None else np.asarray(true_mean, dtype=np.float64)
    Y[idx] = R
    mask = np.ones(n, dtype=bool)
    mask[idx] = False
    return LabeledSample(
        points=Y,
        inlier_mask=mask,
        oracle_mean=Y[mask].mean(axis=0),
        true_mean=mu,
        epsilon=idx.size / n,
        theoretical_sigma=float(theoretical_sigma),
        meta=dict(meta or {}),
    )


def gen_gaussian_two_cluster(d, n, eps, seed):
    """
    N(0, I) inliers; a random eps fraction replaced by two clusters at
    (sqrt(d/2), +-sqrt(d/2), 0, ..., 0). The first cluster gets the odd row.
    """
    if d < 2:
        raise ParameterError(f"the two-cluster setting needs d >= 2, got {d}")
    rng = _as_rng(seed)
    k = corrupted_count(n, eps)
    Y = rng.standard_normal((n, d))
    idx = rng.choice(n, size=k, replace=False) if k else np.empty(0, dtype=np.int64)

    a = math.sqrt(d / 2.0)
    R = np.zeros((k, d))
    first = (k + 1) // 2
    R[:, 0] = a
    R[:first, 1] = a
    R[first:, 1] = -a
    return corrupt(Y, idx, R, true_mean=np.zeros(d), theoretical_sigma=1.0,
                   meta={"setting": "gaussian_two_cluster", "cluster_sizes": [first, k - first]})


def pareto_mean(shape, scale):
    return scale * shape / (shape - 1.0)


def pareto_sigma(shape, scale):
    """Standard deviation of one Pareto coordinate (coordinates are independent, so this is sigma)."""
    return scale * math.sqrt(shape / ((shape - 1.0) ** 2 * (shape - 2.0)))


def gen_pareto_constant(d, n, eps, shape=2.5, scale=1.0, seed=0):
    """
    i.i.d. Pareto(scale, shape) coordinates drawn by inverse CDF; every
    corrupted row is the constant vector 2 + sqrt(g/d), g being the mean
    l2 norm of the clean draw.
    """
    if not shape > 2.0:
        raise ParameterError(f"Pareto shape must exceed 2 for a finite variance, got {shape}")
    if not scale > 0.0:
        raise ParameterError(f"Pareto scale must be positive, got {scale}")
    rng = _as_rng(seed)
    k = corrupted_count(n, eps)
    u = 1.0 - rng.random((n, d))  # (0, 1]
    Y = scale * u ** (-1.0 / shape)
    idx = rng.choice(n, size=k, replace=False) if k else np.empty(0, dtype=np.int64)

    g = float(np.linalg.norm(Y, axis=1).mean())
    value = 2.0 + math.sqrt(g / d)
    R = np.full((k, d), value)
    return corrupt(Y, idx, R, true_mean=np.full(d, pareto_mean(shape, scale)),
                   theoretical_sigma=pareto_sigma(shape, scale),
                   meta={"setting": "pareto_constant", "outlier_value": value, "shape": shape, "scale": scale})


def gen_mixed_outliers(d, n, eps, seed):
    """N(0, I) inliers; half the outliers |N(0, I)|, the other half N(0, I) + U(0, 3) entrywise."""
    rng = _as_rng(seed)
    k = corrupted_count(n, eps)
    Y = rng.standard_normal((n, d))
    idx = rng.choice(n, size=k, replace=False) if k else np.empty(0, dtype=np.int64)

    first = (k + 1) // 2
    folded = np.abs(rng.standard_normal((first, d)))
    shifted = rng.standard_normal((k - first, d)) + rng.uniform(0.0, 3.0, size=(k - first, d))
    R = np.vstack([folded, shifted])
    return corrupt(Y, idx, R, true_mean=np.zeros(d), theoretical_sigma=1.0,
                   meta={"setting": "mixed_outliers"})


def sigma_for(sample, mode="empirical"):
    """sigma handed to the estimators: inlier spectral norm, or the generating distribution's value."""
    if mode == "empirical":
        return empirical_sigma(sample.points[sample.inlier_mask])
    if mode == "theoretical":
        if not math.isfinite(sample.theoretical_sigma):
            raise ParameterError("this sample has no theoretical sigma; use sigma mode 'empirical'")
        return sample.theoretical_sigma
    raise ParameterError(f"unknown sigma mode {mode!r} (expected one of {', '.join(SIGMA_MODES)})")
