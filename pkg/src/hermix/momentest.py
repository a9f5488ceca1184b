"""Optimal-accuracy estimation of Hermite moment polynomials.

From eps-corrupted samples of a regular-form mixture: initialize every moment
polynomial with a bounded-covariance robust mean of the per-sample feature
vectors, then iterate (fit a recurrence to the current estimates, extend it
to twice the degree, reconstruct each feature covariance from the extended
moments, whiten, run the stability filter, unwhiten).  Each round roughly
squares the gap toward the eps floor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .genfunc import ExpandedOperator, extend_by_recurrence
from .hermite import GaussianMixture
from .polyalg import (
    BiPolynomial,
    CompactMatrix,
    Polynomial,
    monomial_basis,
    multinomial,
    poly_mul,
    sym_tensorize,
)

__all__ = [
    "HermiteEstimates",
    "solve_recurrence_coeffs",
    "hermite_cov_from_moments",
    "estimate_hermite_moments",
    "compact_feature_matrix",
]


@dataclass
class HermiteEstimates:
    """Moment polynomial estimates with covariance estimates and round log."""

    m_max: int
    estimates: list[Polynomial]
    covariances: list[np.ndarray | None]
    rounds: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.estimates) != self.m_max + 1:
            raise ValueError("need estimates h_0..h_m")
        for j, h in enumerate(self.estimates):
            if not h.is_zero() and (not h.is_homogeneous() or h.degree() != j):
                raise ValueError(f"estimate {j} is not homogeneous of degree {j}")

    def to_json(self) -> dict:
        def poly_json(p: Polynomial):
            return {
                ",".join(str(a) for a in idx): c
                for idx, c in sorted(p.terms.items(), reverse=True)
            }

        return {
            "m_max": self.m_max,
            "estimates": [poly_json(h) for h in self.estimates],
            "rounds": self.rounds,
            "meta": self.meta,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def default_moment_degree(k: int) -> int:
    """Moment count at which the recurrence fit is reliably well-determined.

    2 (2^k - 1) is the algebraic minimum for the solve; measured on exact
    moments the least-squares system for k = 2 only pins the extension down
    from m = 10, and k = 1 benefits from extra degrees for density fitting,
    so the small-k defaults are calibrated upward.
    """
    if k == 1:
        return 6
    if k == 2:
        return 10
    return 2 * ((1 << k) - 1)


def compact_feature_matrix(samples: np.ndarray, degree: int) -> np.ndarray:
    """Per-sample coefficient vectors of H_degree(X, z) in the weighted basis."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    d = samples.shape[1]
    raw = kernels.hermite_feature_coeffs(samples, degree)[degree]
    scale = np.array([1.0 / math.sqrt(multinomial(b)) for b in monomial_basis(d, degree)])
    return raw * scale


def _compact_to_poly(vec: np.ndarray, dim: int, degree: int) -> Polynomial:
    return Polynomial.from_compact_vector(vec, dim, degree)


def solve_recurrence_coeffs(
    h: list[Polynomial], k: int, ridge_scale: float = 1e-10
) -> tuple[ExpandedOperator, dict]:
    """Fit an order-(2^k - 1) recurrence to moment estimates h_0..h_m.

    Solves ridge least squares over the coefficients of the R_{j,l} (with
    R_{kappa,0} fixed to 1), minimizing the summed squared coefficient norms
    of the recurrence residuals at shifts kappa..m.  Each shift's residual
    block is normalized to unit scale before stacking; moment norms grow
    factorially and would otherwise swamp the low shifts.  Returns the
    operator and a residual report.
    """
    kappa = (1 << k) - 1
    m = len(h) - 1
    if m < 2 * kappa:
        raise ValueError(f"need m >= {2 * kappa}, got {m}")
    dim = h[0].dim

    unknowns = []  # (j, l, monomial)
    for j in range(kappa + 1):
        for l in range(kappa - j + 1):
            if (j, l) == (kappa, 0):
                continue
            for mono in monomial_basis(dim, kappa - j + l):
                unknowns.append((j, l, mono))
    col_of = {u: i for i, u in enumerate(unknowns)}

    rows = []
    rhs = []
    for a in range(kappa, m + 1):
        basis_a = monomial_basis(dim, a)
        idx_a = {b: i for i, b in enumerate(basis_a)}
        block = np.zeros((len(basis_a), len(unknowns)))
        target = np.zeros(len(basis_a))
        wts = np.array([1.0 / math.sqrt(multinomial(b)) for b in basis_a])
        for (j, l, mono) in unknowns:
            if a - kappa - l < 0:
                continue
            src = h[a - kappa + j - l]
            if src.is_zero():
                continue
            fac = 1.0 / math.factorial(a - kappa - l)
            col = col_of[(j, l, mono)]
            for idx, c in src.terms.items():
                tgt = tuple(x + y for x, y in zip(idx, mono))
                block[idx_a[tgt], col] += fac * c
        # constant term from R_{kappa,0} = 1: h_a / (a - kappa)!
        fac = 1.0 / math.factorial(a - kappa)
        for idx, c in h[a].terms.items():
            target[idx_a[idx]] -= fac * c
        block *= wts[:, None]
        target *= wts
        scale = max(float(np.linalg.norm(target)), float(np.abs(block).max()), 1e-30)
        rows.append(block / scale)
        rhs.append(target / scale)
    A = np.concatenate(rows, axis=0)
    b = np.concatenate(rhs)

    lam = ridge_scale * max(float(np.mean(A * A)), 1e-300)
    stacked = np.vstack([A, math.sqrt(lam) * np.eye(A.shape[1])])
    x = np.linalg.lstsq(stacked, np.concatenate([b, np.zeros(A.shape[1])]), rcond=None)[0]

    resid = A @ x - b
    report = {
        "residual_norm": float(np.linalg.norm(resid)),
        "target_norm": float(np.linalg.norm(b)),
        "ridge": lam,
    }

    coeffs: dict[tuple[int, int], Polynomial] = {
        (kappa, 0): Polynomial.constant(dim, 1.0)
    }
    for (j, l, mono), col in col_of.items():
        c = float(x[col])
        if c != 0.0:
            p = coeffs.get((j, l), Polynomial.zero(dim))
            coeffs[(j, l)] = p + Polynomial(dim, {mono: c})
    return ExpandedOperator(dim, kappa, coeffs), report


def hermite_cov_from_moments(h: list[Polynomial], m: int) -> np.ndarray:
    """Covariance of the degree-m feature vector, reconstructed from moments.

    Builds sum_j h_{j,j} (X1.X2)^{m-j} (m!)^2 / ((2j)! (m-j)!) where h_{j,j}
    is the bidegree-(j,j) part of h_{2j}(X1 + X2), symmetric-tensorizes it,
    and subtracts the outer product of the degree-m moment vector.  Equals
    the covariance of the weighted-basis feature vector when h is exact.
    """
    if len(h) < 2 * m + 1:
        raise ValueError("need moments h_0..h_{2m}")
    dim = h[0].dim
    dot = BiPolynomial.dot_product(dim)
    total = BiPolynomial.zero(dim)
    for j in range(m + 1):
        hjj = BiPolynomial.from_symmetric_expansion(h[2 * j]).bidegree_part(j, j)
        if not hjj.terms:
            continue
        scale = math.factorial(m) ** 2 / (math.factorial(2 * j) * math.factorial(m - j))
        total = total + (hjj * dot.power(m - j)).scale(scale)
    second_moment = sym_tensorize(total).data
    mean_vec = h[m].compact_vector(m)
    return second_moment - np.outer(mean_vec, mean_vec)


def _psd_project(mat: np.ndarray, floor: float):
    """Clamp eigenvalues to >= floor; returns (projected, sqrt, inv_sqrt)."""
    sym = (mat + mat.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    vals = np.maximum(vals, floor)
    return (
        vecs @ np.diag(vals) @ vecs.T,
        vecs @ np.diag(np.sqrt(vals)) @ vecs.T,
        vecs @ np.diag(vals**-0.5) @ vecs.T,
    )


def estimate_hermite_moments(
    samples,
    k: int,
    m: int,
    eps: float,
    theta: float,
    sigma_bound: float = 10.0,
    rounds: int = 6,
    tol: float = 1e-6,
    delta: float | None = None,
    c1: float = 9.0,
    ridge_scale: float = 1e-10,
) -> HermiteEstimates:
    """Estimate moment polynomials h_1..h_m from eps-corrupted samples.

    ``theta`` is the mixing-weight floor (sets the covariance eigenvalue
    floor); ``sigma_bound`` the a-priori feature standard deviation bound for
    initialization; ``delta`` the filter's target accuracy scale (default
    eps).
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n, dim = samples.shape
    if delta is None:
        delta = max(eps / 3.0, 1e-3)
    from .robustmean import bounded_cov_mean, stability_filter_mean, trimmed_mean_1d

    feats = [compact_feature_matrix(samples, j) for j in range(m + 1)]

    ests: list[Polynomial] = [Polynomial.constant(dim, 1.0)]
    for j in range(1, m + 1):
        vec = bounded_cov_mean(feats[j], eps, sigma_bound)
        ests.append(_compact_to_poly(vec, dim, j))

    # coordinate-wise trimmed-mean referee: crude but safe (error
    # O(eps log(1/eps)) per coordinate), used to veto refreshes that a badly
    # reconstructed covariance would otherwise let the filter corrupt
    trim = min(0.3, 3.0 * eps + 0.001)
    referee = [None]
    ref_slack = [0.0]
    for j in range(1, m + 1):
        f = feats[j]
        referee.append(np.array([trimmed_mean_1d(f[:, c], trim) for c in range(f.shape[1])]))
        mad = 1.4826 * np.median(np.abs(f - np.median(f, axis=0)), axis=0)
        scale = float(np.linalg.norm(mad))
        ref_slack.append(
            3.0 * eps * max(1.0, math.log(1.0 / max(eps, 1e-6))) * scale
            + 5.0 * scale / math.sqrt(n)
        )

    covs: list[np.ndarray | None] = [None] * (m + 1)
    log: list[dict] = []
    floor = max(theta / 2.0, 1e-6)
    for rnd in range(rounds):
        op, solve_report = solve_recurrence_coeffs(ests, k, ridge_scale)
        extended = ests + extend_by_recurrence(op, ests)
        move = 0.0
        filters = []
        new_ests = [Polynomial.constant(dim, 1.0)]
        for j in range(1, m + 1):
            cov = hermite_cov_from_moments(extended, j)
            projected, sqrt_c, inv_sqrt_c = _psd_project(cov, floor)
            covs[j] = projected
            whitened = feats[j] @ inv_sqrt_c.T
            mu_w, rep = stability_filter_mean(whitened, eps, delta, c1=c1)
            vec = sqrt_c @ mu_w
            prev = ests[j].compact_vector(j)
            vetoed = False
            if rep.failed:
                vetoed = True
            else:
                # veto refreshes that drift away from the referee
                bound = max(
                    float(np.linalg.norm(prev - referee[j])), ref_slack[j]
                )
                vetoed = float(np.linalg.norm(vec - referee[j])) > bound
            if vetoed:
                new_ests.append(ests[j])
            else:
                scale = max(1.0, float(np.linalg.norm(prev)))
                move = max(move, float(np.linalg.norm(vec - prev)) / scale)
                new_ests.append(_compact_to_poly(vec, dim, j))
            filters.append(
                {
                    "degree": j,
                    "iterations": rep.iterations,
                    "removed": rep.removed,
                    "top_eigenvalue": rep.top_eigenvalue,
                    "failed": rep.failed,
                    "vetoed": vetoed,
                }
            )
        ests = new_ests
        log.append(
            {
                "round": rnd + 1,
                "movement": move,
                "recurrence": solve_report,
                "filters": filters,
            }
        )
        if move < tol:
            break

    return HermiteEstimates(
        m_max=m,
        estimates=ests,
        covariances=covs,
        rounds=log,
        meta={"n": int(n), "dim": int(dim), "k": k, "eps": eps, "theta": theta},
    )
