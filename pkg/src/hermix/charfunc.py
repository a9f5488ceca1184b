"""Exact inversion from generating-function space back to densities.

An expression sum_j P_j(iX) exp(i mu_j(X) - (1/2) S_j(X)) is the adjusted
characteristic function of exactly one polynomial-Gaussian combination
sum_j q_j(t) N(mu_j, I + S_j)(t); this module computes that inverse in closed
form.  Complex arithmetic never appears: each homogeneous degree-m part of
P_j carries an i^m factor that the Hermite-product formula absorbs into real
coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hermite import Gaussian, MPGModel, univariate_hermite
from .polyalg import Polynomial, affine_substitute, linear_substitute, poly_mul

__all__ = [
    "GenCombination",
    "invert_poly_exponential",
    "invert_combination",
    "inv_sqrt_psd",
]


@dataclass(frozen=True)
class GenCombination:
    """Components (P_j, mu_j, S_j) of sum_j P_j(iX) e^{i mu_j(X) - S_j(X)/2}.

    P_j has real coefficients; the covariance argument S_j is the deviation
    from identity, so component j corresponds to the Gaussian N(mu_j, I+S_j).
    """

    polys: tuple[Polynomial, ...]
    means: tuple
    sigma_devs: tuple

    @property
    def dim(self) -> int:
        return self.polys[0].dim

    @property
    def k(self) -> int:
        return len(self.polys)


def inv_sqrt_psd(mat, floor: float = 1e-12) -> np.ndarray:
    """Symmetric inverse square root; hard error below the eigenvalue floor."""
    mat = np.asarray(mat, dtype=float)
    vals, vecs = np.linalg.eigh((mat + mat.T) / 2.0)
    if np.any(vals < floor):
        raise ValueError(f"matrix has eigenvalue below {floor}: {vals.min()}")
    return vecs @ np.diag(vals**-0.5) @ vecs.T


def _hermite_product_poly(coeffs: Polynomial) -> Polynomial:
    """sum_a c_a prod_j H_{a_j}(s_j) as a polynomial in s."""
    d = coeffs.dim
    out = Polynomial.zero(d)
    uni_cache: dict[int, Polynomial] = {}

    def uni(m: int) -> Polynomial:
        if m not in uni_cache:
            uni_cache[m] = univariate_hermite(m)
        return uni_cache[m]

    for idx, c in coeffs.terms.items():
        term = Polynomial.constant(d, c)
        for j, a in enumerate(idx):
            if a == 0:
                continue
            # embed the univariate Hermite polynomial into coordinate j
            hj = Polynomial(
                d,
                {
                    tuple(e if t == j else 0 for t in range(d)): cc
                    for (e,), cc in uni(a).terms.items()
                },
            )
            term = poly_mul(term, hj)
        out = out + term
    return out


def invert_poly_exponential(p: Polynomial, mean, sigma_dev):
    """Invert i^m p(X) e^{i mu(X) - S(X)/2} to (q, N(mu, I+S)).

    q(t) = sum_a c_a prod_j H_{a_j}(s_j) with s = (I+S)^{-1/2}(t - mu) and
    c_a the coefficients of p((I+S)^{-1/2} Y); the inverse of the adjusted
    characteristic function of the input is q(t) times the Gaussian density.
    """
    if not p.is_homogeneous():
        raise ValueError("p must be homogeneous")
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    d = p.dim
    cov = np.eye(d) + np.asarray(sigma_dev, dtype=float)
    w = inv_sqrt_psd(cov)
    h = linear_substitute(p, w)  # p((I+S)^{-1/2} Y)
    q_in_s = _hermite_product_poly(h)
    q = affine_substitute(q_in_s, w, -w @ mean)  # s = W (t - mu)
    return q, Gaussian(mean, cov)


def invert_combination(comb: GenCombination) -> MPGModel:
    """Component-wise inversion to a polynomial-Gaussian model.

    Each P_j splits into homogeneous parts, inverted separately (the i^m
    factors are per-degree); the result is generally not a distribution.
    """
    polys = []
    gaussians = []
    for p, mu, sd in zip(comb.polys, comb.means, comb.sigma_devs):
        d = p.dim
        q_total = Polynomial.zero(d)
        g = None
        for m in range(p.degree() + 1):
            part = p.homogeneous_part(m)
            if part.is_zero() and m > 0:
                continue
            q, g = invert_poly_exponential(part, mu, sd)
            q_total = q_total + q
        polys.append(q_total)
        gaussians.append(g)
    return MPGModel(polys, gaussians, is_distribution=False)
