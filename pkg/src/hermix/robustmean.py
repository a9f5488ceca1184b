"""Robust mean estimation: trimmed means, a bounded-covariance filter, and
the stability-based spectral filter used on whitened feature vectors.

The spectral filter assumes the uncorrupted points have covariance close to
identity.  Each round it checks the top eigenvalue of the empirical
covariance; while it exceeds the stopping threshold, points are scored by
squared deviation from the projected median along the top eigenvector and the
upper tail of scores is removed.  Filtering is deterministic so runs are
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FilterReport",
    "trimmed_mean_1d",
    "bounded_cov_mean",
    "stability_filter_mean",
    "pseudo_stability_check",
]


@dataclass
class FilterReport:
    iterations: int = 0
    removed: int = 0
    top_eigenvalue: float = 0.0
    mean: np.ndarray | None = None
    failed: bool = False


def trimmed_mean_1d(xs, eps: float) -> float:
    """Mean after dropping the ceil(eps*n) largest deviations from the median."""
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size == 0:
        raise ValueError("empty input")
    if not 0 <= eps < 0.5:
        raise ValueError("eps must be in [0, 1/2)")
    cut = math.ceil(eps * xs.size)
    if cut == 0:
        return float(xs.mean())
    dev = np.abs(xs - np.median(xs))
    keep = np.argsort(dev, kind="stable")[: xs.size - cut]
    return float(xs[keep].mean())


def _mean_cov(xs: np.ndarray):
    mu = xs.mean(axis=0)
    c = xs - mu
    return mu, (c.T @ c) / xs.shape[0]


def _top_eig(cov: np.ndarray):
    vals, vecs = np.linalg.eigh(cov)
    return float(vals[-1]), vecs[:, -1]


def bounded_cov_mean(xs, eps: float, sigma: float) -> np.ndarray:
    """Robust mean under the promise Cov(inliers) <= sigma^2 I.

    Filters along the top eigenvector until the top empirical eigenvalue is
    at most 9 sigma^2; achieves O(sigma sqrt(eps)) error on eps-corrupted
    inputs.  With eps = 0 the sample mean is returned unchanged.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[0] == 0:
        raise ValueError("empty input")
    if eps == 0:
        return xs.mean(axis=0)
    n = xs.shape[0]
    alive = np.ones(n, dtype=bool)
    max_removed = math.floor(0.45 * n)
    for _ in range(100):
        pts = xs[alive]
        mu, cov = _mean_cov(pts)
        lam, v = _top_eig(cov)
        if lam <= 9.0 * sigma**2:
            return mu
        proj = pts @ v
        scores = (proj - np.median(proj)) ** 2
        k = max(1, math.ceil(0.5 * eps * pts.shape[0]))
        thresh = np.partition(scores, -k)[-k]
        drop = scores >= thresh
        if drop.all() or n - alive.sum() + drop.sum() > max_removed:
            break
        idx = np.flatnonzero(alive)
        alive[idx[drop]] = False
    return xs[alive].mean(axis=0)


def stability_filter_mean(
    xs,
    eps: float,
    delta: float,
    c1: float = 9.0,
    max_iters: int = 100,
) -> tuple[np.ndarray, FilterReport]:
    """Iterative spectral filter for near-isotropic inliers.

    Stops when the top empirical eigenvalue is at most
    1 + max(c1 delta^2 / eps, finite-sample slack); the slack term makes the
    uncorrupted case stop immediately.  Each round removes the upper tail of
    squared deviations from the projected median along the top eigenvector,
    with tail mass proportional to the eigenvalue excess.  Removing more than
    half the points signals failure (inputs were not stable).
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    n, dim = xs.shape
    if n == 0:
        raise ValueError("empty input")
    if not 0 <= eps < 1 / 6:
        raise ValueError("eps must be in [0, 1/6)")
    report = FilterReport()
    slack = 3.0 * (math.sqrt(dim / n) + dim / n)
    threshold = 1.0 + (max(c1 * delta**2 / eps, slack) if eps > 0 else slack)
    alive = np.ones(n, dtype=bool)
    for it in range(max_iters):
        pts = xs[alive]
        mu, cov = _mean_cov(pts)
        lam, v = _top_eig(cov)
        report.iterations = it
        report.top_eigenvalue = lam
        if lam <= threshold:
            break
        proj = pts @ v
        scores = (proj - np.median(proj)) ** 2
        # tail mass scales with the share of variance above threshold, with a
        # progress floor so the loop terminates within the iteration budget
        excess = max(0.0, 1.0 - threshold / lam)
        frac = min(
            0.5 * max(eps, 1.0 / n),
            max(1.0 / pts.shape[0], 0.3 * eps * excess + 0.02 * eps),
        )
        k = max(1, math.ceil(frac * pts.shape[0]))
        thresh = np.partition(scores, -k)[-k]
        drop = scores >= thresh
        idx = np.flatnonzero(alive)
        alive[idx[drop]] = False
        report.removed = n - int(alive.sum())
        if alive.sum() < n / 2:
            report.failed = True
            break
    mu = xs[alive].mean(axis=0)
    report.mean = mu
    report.removed = n - int(alive.sum())
    return mu, report


def pseudo_stability_check(
    xs,
    eps: float,
    delta: float,
    mu_true,
    cov_true,
    n_directions: int = 200,
    rng: np.random.Generator | None = None,
) -> bool:
    """Diagnostic: does every greedy (1-eps)-subset look stable per direction?

    Samples random directions plus the top empirical eigenvectors; for each,
    checks the worst achievable mean shift and second-moment distortion over
    subsets that drop an eps-fraction from either tail.  Test-only.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    n, dim = xs.shape
    mu_true = np.asarray(mu_true, dtype=float)
    cov_true = np.asarray(cov_true, dtype=float)
    cut = math.floor(eps * n)
    if cut == 0:
        cut = 0
    if rng is None:
        rng = np.random.default_rng(0)
    dirs = rng.standard_normal((n_directions, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    _, cov_emp = _mean_cov(xs)
    vals, vecs = np.linalg.eigh(cov_emp)
    dirs = np.concatenate([dirs, vecs.T], axis=0)

    keep = n - cut
    for v in dirs:
        proj = xs @ v
        mu_v = float(mu_true @ v)
        var_v = float(v @ cov_true @ v)
        order = np.sort(proj)
        prefix = np.concatenate([[0.0], np.cumsum(order)])
        # extremes of the subset mean: drop the top cut or the bottom cut
        lo_mean = prefix[keep] / keep
        hi_mean = (prefix[n] - prefix[n - keep]) / keep
        if max(abs(lo_mean - mu_v), abs(hi_mean - mu_v)) > delta:
            return False
        sq = np.sort((proj - mu_v) ** 2)
        sq_prefix = np.concatenate([[0.0], np.cumsum(sq)])
        lo_sec = sq_prefix[keep] / keep
        hi_sec = (sq_prefix[n] - sq_prefix[n - keep]) / keep
        if max(abs(lo_sec - var_v), abs(hi_sec - var_v)) > delta**2 / max(eps, 1.0 / n):
            return False
    return True
