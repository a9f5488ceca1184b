"""Hermite polynomials and Hermite moment polynomials.

Uses probabilists' Hermite polynomials throughout.  The degree-m feature of a
point z is the homogeneous polynomial H_m(X, z) obtained by homogenizing the
univariate Hermite polynomial with x -> z.X and y^2 -> |X|^2; its expectation
over z is a degree-m moment polynomial in the formal variables X.  For
Gaussians and polynomial-weighted Gaussians those expectations have exact
closed forms as truncated exponential series, which is what this module
computes (no numeric integration anywhere).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .polyalg import (
    Polynomial,
    affine_substitute,
    monomial_basis,
    poly_mul,
)

__all__ = [
    "Gaussian",
    "GaussianMixture",
    "MPGModel",
    "univariate_hermite",
    "hermite_feature",
    "gaussian_hermite_moments",
    "mixture_hermite_moments",
    "gaussian_smooth_poly",
    "central_gaussian_moment",
    "gaussian_expectation",
    "mpg_hermite_moments",
    "empirical_hermite_mean",
    "mpg_pdf",
    "model_to_json",
    "model_from_json",
]


# ---------------------------------------------------------------------------
# model types
# ---------------------------------------------------------------------------


class Gaussian:
    """Gaussian N(mean, cov) with cached Cholesky factor.

    The covariance is stored in full; code working in regular form reads the
    deviation from identity via ``sigma_dev`` to avoid cancellation.
    """

    __slots__ = ("mean", "cov", "_chol", "_chol_inv", "_log_norm")

    def __init__(self, mean, cov):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.asarray(cov, dtype=float)
        if cov.ndim == 0:
            cov = cov.reshape(1, 1)
        self.cov = cov
        if self.cov.shape != (self.dim, self.dim):
            raise ValueError("covariance shape mismatch")
        if not np.allclose(self.cov, self.cov.T, atol=1e-10):
            raise ValueError("covariance must be symmetric")
        try:
            self._chol = np.linalg.cholesky(self.cov)
        except np.linalg.LinAlgError as e:
            raise ValueError("covariance must be positive definite") from e
        self._chol_inv = np.linalg.inv(self._chol)
        self._log_norm = -0.5 * (
            self.dim * math.log(2 * math.pi)
            + 2.0 * float(np.sum(np.log(np.diag(self._chol))))
        )

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def chol(self) -> np.ndarray:
        return self._chol

    def sigma_dev(self) -> np.ndarray:
        """The deviation S with cov = I + S."""
        return self.cov - np.eye(self.dim)

    def logpdf(self, x) -> np.ndarray:
        from . import kernels

        return kernels.gaussian_logpdf(x, self.mean, self._chol_inv, self._log_norm)

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        g = rng.standard_normal((n, self.dim))
        return self.mean + g @ self._chol.T

    def __repr__(self):
        return f"Gaussian(mean={self.mean!r}, cov={self.cov!r})"


@dataclass
class GaussianMixture:
    components: list[Gaussian]
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.components) != self.weights.shape[0]:
            raise ValueError("weights/components length mismatch")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        if abs(float(self.weights.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def k(self) -> int:
        return len(self.components)

    def logpdf(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        lp = np.stack([g.logpdf(x) for g in self.components], axis=1)
        lp += np.log(self.weights)
        m = lp.max(axis=1, keepdims=True)
        return (m + np.log(np.sum(np.exp(lp - m), axis=1, keepdims=True))).ravel()

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        counts = rng.multinomial(n, self.weights)
        parts = [g.sample(c, rng) for g, c in zip(self.components, counts) if c > 0]
        pts = np.concatenate(parts, axis=0)
        rng.shuffle(pts, axis=0)
        return pts


@dataclass
class MPGModel:
    """Mixture of polynomial Gaussians: sum_j Q_j(x) G_j(x).

    ``is_distribution`` marks models whose weight polynomials are nonnegative
    by construction and whose total integral is 1.
    """

    weight_polys: list[Polynomial]
    components: list[Gaussian]
    is_distribution: bool = False

    def __post_init__(self):
        if len(self.weight_polys) != len(self.components):
            raise ValueError("weight_polys/components length mismatch")

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def k(self) -> int:
        return len(self.components)

    def degree(self) -> int:
        return max((q.degree() for q in self.weight_polys), default=0)

    def pdf(self, x) -> np.ndarray:
        return mpg_pdf(self, x)

    @staticmethod
    def from_mixture(mix: GaussianMixture) -> "MPGModel":
        d = mix.dim
        return MPGModel(
            [Polynomial.constant(d, float(w)) for w in mix.weights],
            list(mix.components),
            is_distribution=True,
        )


def mpg_pdf(model: MPGModel, x) -> np.ndarray:
    """Pointwise density sum_j Q_j(x) N_j(x), Gaussian factor in log space."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape[0])
    for q, g in zip(model.weight_polys, model.components):
        out += q.eval_many(x) * np.exp(g.logpdf(x))
    return out


# ---------------------------------------------------------------------------
# Hermite polynomials
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def univariate_hermite(m: int) -> Polynomial:
    """Probabilists' Hermite polynomial H_m in one variable.

    H_m = x H_{m-1} - (m-1) H_{m-2}, H_0 = 1, H_1 = x.
    """
    if m < 0:
        raise ValueError("degree must be nonnegative")
    if m == 0:
        return Polynomial.constant(1, 1.0)
    if m == 1:
        return Polynomial.variable(1, 0)
    x = Polynomial.variable(1, 0)
    return poly_mul(x, univariate_hermite(m - 1)) - univariate_hermite(m - 2).scale(
        m - 1
    )


@lru_cache(maxsize=None)
def _homogenized_hermite_terms(m: int) -> tuple[tuple[int, int, float], ...]:
    """H_m(u, s) written as sum c * u^j s^((m-j)/2); entries (j, t, c)."""
    out = []
    for (j,), c in univariate_hermite(m).terms.items():
        t = (m - j) // 2
        out.append((j, t, c))
    return tuple(out)


def hermite_feature(z, m: int) -> Polynomial:
    """The homogeneous degree-m polynomial H_m(X, z) in the X variables."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    d = z.shape[0]
    if m == 0:
        return Polynomial.constant(d, 1.0)
    zx = Polynomial.from_linear(z)
    xsq = Polynomial.from_quadratic(np.eye(d))
    out = Polynomial.zero(d)
    for j, t, c in _homogenized_hermite_terms(m):
        out = out + poly_mul(zx.power(j), xsq.power(t)).scale(c)
    return out


# ---------------------------------------------------------------------------
# moment polynomials via exponential generating series
# ---------------------------------------------------------------------------


def _exp_primary_terms(a: Polynomial, b: Polynomial, m_max: int) -> list[Polynomial]:
    """Primary terms f_j of exp(a(X) y + (1/2) b(X) y^2), for j <= m_max.

    The series satisfies f_{j+1} = a f_j + j b f_{j-1}, exact in coefficient
    arithmetic.
    """
    d = a.dim
    out = [Polynomial.constant(d, 1.0)]
    if m_max >= 1:
        out.append(a)
    for j in range(1, m_max):
        out.append(poly_mul(a, out[j]) + poly_mul(b, out[j - 1]).scale(j))
    return out[: m_max + 1]


def gaussian_hermite_moments(g: Gaussian, m_max: int) -> list[Polynomial]:
    """Moment polynomials h_0..h_{m_max} of N(mu, I + S).

    h_m is m! times the y^m coefficient of exp(mu(X) y + (1/2) S(X) y^2)
    where S is the covariance deviation from identity.
    """
    mu = Polynomial.from_linear(g.mean)
    sig = Polynomial.from_quadratic(g.sigma_dev())
    return _exp_primary_terms(mu, sig, m_max)


def mixture_hermite_moments(mix: GaussianMixture, m_max: int) -> list[Polynomial]:
    d = mix.dim
    out = [Polynomial.zero(d) for _ in range(m_max + 1)]
    for w, g in zip(mix.weights, mix.components):
        for j, h in enumerate(gaussian_hermite_moments(g, m_max)):
            out[j] = out[j] + h.scale(float(w))
    return out


def central_gaussian_moment(cov, idx: tuple[int, ...], _cache=None) -> float:
    """E[u^idx] for u ~ N(0, cov), via the pairing recursion."""
    cov = np.asarray(cov, dtype=float)
    if _cache is None:
        _cache = {}
    idx = tuple(int(a) for a in idx)

    def rec(a: tuple[int, ...]) -> float:
        total = sum(a)
        if total == 0:
            return 1.0
        if total % 2 == 1:
            return 0.0
        if a in _cache:
            return _cache[a]
        i = next(j for j, v in enumerate(a) if v > 0)
        rest = list(a)
        rest[i] -= 1
        out = 0.0
        for j in range(len(a)):
            if rest[j] > 0:
                red = list(rest)
                red[j] -= 1
                out += cov[i, j] * rest[j] * rec(tuple(red))
        _cache[a] = out
        return out

    return rec(idx)


def gaussian_smooth_poly(q: Polynomial, sigma_dev) -> Polynomial:
    """Smooth q under additive N(0, I + sigma_dev) noise.

    Returns P with P(w) = E[q(w + (I + S)^{1/2} g)], g standard normal;
    exact via central Gaussian moments, degree(P) <= degree(q).
    """
    d = q.dim
    cov = np.eye(d) + np.asarray(sigma_dev, dtype=float)
    cache: dict = {}
    out_terms: dict[tuple[int, ...], float] = {}
    for idx, c in q.terms.items():
        # expand prod_i (w_i + u_i)^{a_i} and take expectations over u
        splits = [[(b, math.comb(a, b)) for b in range(a + 1)] for a in idx]
        stack = [((), (), 1.0)]
        for i, choices in enumerate(splits):
            nxt = []
            for wpart, upart, coef in stack:
                for b, binom in choices:
                    nxt.append((wpart + (idx[i] - b,), upart + (b,), coef * binom))
            stack = nxt
        for wpart, upart, coef in stack:
            mom = central_gaussian_moment(cov, upart, cache)
            if mom != 0.0:
                out_terms[wpart] = out_terms.get(wpart, 0.0) + c * coef * mom
    return Polynomial(d, out_terms)


def gaussian_expectation(q: Polynomial, g: Gaussian) -> float:
    """Exact E_{x ~ g}[q(x)] via central moments."""
    cache: dict = {}
    mu = g.mean
    total = 0.0
    for idx, c in q.terms.items():
        splits = [[(b, math.comb(a, b)) for b in range(a + 1)] for a in idx]
        stack = [((), 1.0)]
        for i, choices in enumerate(splits):
            nxt = []
            for upart, coef in stack:
                for b, binom in choices:
                    nxt.append((upart + (b,), coef * binom * mu[i] ** (idx[i] - b)))
            stack = nxt
        for upart, coef in stack:
            mom = central_gaussian_moment(g.cov, upart, cache)
            if mom != 0.0:
                total += c * coef * mom
    return total


def _poly_times_primary_series(
    ypoly: list[Polynomial], primary: list[Polynomial]
) -> list[Polynomial]:
    """Primary terms of (sum_t ypoly[t] y^t) * (sum_j primary[j] y^j / j!)."""
    d = primary[0].dim
    n = len(primary)
    out = [Polynomial.zero(d) for _ in range(n)]
    for t, a in enumerate(ypoly):
        if a.is_zero():
            continue
        for i in range(t, n):
            # y^t * y^{i-t}/(i-t)! = (i!/(i-t)!) y^i/i!
            fall = math.factorial(i) // math.factorial(i - t)
            out[i] = out[i] + poly_mul(a, primary[i - t]).scale(float(fall))
    return out


def _substituted_poly_series(p: Polynomial, mean, cov) -> list[Polynomial]:
    """y-coefficients of p(mean + cov X y), each a polynomial in X.

    Entry t is the X-polynomial multiplying y^t (ordinary coefficients, no
    factorial normalization); entry t is homogeneous of degree t.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    d = p.dim
    rows = [Polynomial.from_linear(cov[i]) for i in range(d)]
    deg = p.degree()
    out = [Polynomial.zero(d) for _ in range(deg + 1)]
    pow_cache: dict[tuple[int, int], Polynomial] = {}

    def row_pow(i: int, a: int) -> Polynomial:
        key = (i, a)
        if key not in pow_cache:
            pow_cache[key] = rows[i].power(a)
        return pow_cache[key]

    for idx, c in p.terms.items():
        # prod_i (mean_i + L_i(X) y)^{a_i}: binomial per coordinate
        stack = [(0, Polynomial.constant(d, c))]  # (y-power, X-poly)
        for i, a in enumerate(idx):
            if a == 0:
                continue
            nxt = []
            for t, pol in stack:
                for b in range(a + 1):
                    coef = math.comb(a, b) * mean[i] ** (a - b)
                    if coef == 0.0:
                        continue
                    nxt.append((t + b, poly_mul(pol, row_pow(i, b)).scale(coef)))
            stack = nxt
        for t, pol in stack:
            out[t] = out[t] + pol
    return out


def mpg_hermite_moments(model: MPGModel, m_max: int) -> list[Polynomial]:
    """Moment polynomials of a polynomial-Gaussian combination.

    For component Q G with G = N(mu, I + S), the generating series is
    P(mu + (I + S) X y) exp(mu(X) y + (1/2) S(X) y^2) where P is the smoothed
    weight polynomial; h_m is m! times the y^m coefficient of the sum.
    """
    d = model.dim
    out = [Polynomial.zero(d) for _ in range(m_max + 1)]
    for q, g in zip(model.weight_polys, model.components):
        sdev = g.sigma_dev()
        smoothed = gaussian_smooth_poly(q, sdev)
        ypoly = _substituted_poly_series(smoothed, g.mean, g.cov)
        mu = Polynomial.from_linear(g.mean)
        sig = Polynomial.from_quadratic(sdev)
        evolved = _poly_times_primary_series(ypoly, _exp_primary_terms(mu, sig, m_max))
        for j in range(m_max + 1):
            out[j] = out[j] + evolved[j]
    return out


def empirical_hermite_mean(samples, m: int) -> Polynomial:
    """Coefficient-wise average of H_m(X, z_i) over the sample."""
    from . import kernels  # local import: kernels pulls in compiled backend

    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 0:
        raise ValueError("empty sample")
    d = samples.shape[1]
    coeffs = kernels.hermite_feature_coeffs(samples, m)[m]
    mean = coeffs.mean(axis=0)
    basis = monomial_basis(d, m)
    return Polynomial(d, {b: float(c) for b, c in zip(basis, mean)})


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def _poly_to_json(p: Polynomial) -> dict:
    items = sorted(p.terms.items(), key=lambda t: (sum(t[0]), tuple(-e for e in t[0])))
    return {",".join(str(a) for a in idx): c for idx, c in items}


def _poly_from_json(obj: dict, dim: int) -> Polynomial:
    terms = {}
    for key, c in obj.items():
        idx = tuple(int(s) for s in key.split(","))
        if len(idx) != dim:
            raise ValueError(f"monomial {key} has wrong dimension")
        terms[idx] = float(c)
    return Polynomial(dim, terms)


def model_to_json(model) -> dict:
    """Serialize a GaussianMixture or MPGModel to the shared JSON schema."""
    if isinstance(model, GaussianMixture):
        comps = [
            {"weight": float(w), "mean": g.mean.tolist(), "cov": g.cov.tolist()}
            for w, g in zip(model.weights, model.components)
        ]
        return {"dim": model.dim, "kind": "mixture", "components": comps}
    if isinstance(model, MPGModel):
        comps = [
            {
                "weight_poly": _poly_to_json(q),
                "mean": g.mean.tolist(),
                "cov": g.cov.tolist(),
            }
            for q, g in zip(model.weight_polys, model.components)
        ]
        return {
            "dim": model.dim,
            "kind": "mpg",
            "is_distribution": model.is_distribution,
            "components": comps,
        }
    raise TypeError(f"cannot serialize {type(model)!r}")


def model_from_json(obj):
    dim = int(obj["dim"])
    comps = obj["components"]
    if obj.get("kind", "mixture") == "mixture" or all("weight" in c for c in comps):
        return GaussianMixture(
            [Gaussian(c["mean"], c["cov"]) for c in comps],
            np.array([c["weight"] for c in comps], dtype=float),
        )
    return MPGModel(
        [_poly_from_json(c["weight_poly"], dim) for c in comps],
        [Gaussian(c["mean"], c["cov"]) for c in comps],
        is_distribution=bool(obj.get("is_distribution", False)),
    )


def model_dumps(model) -> str:
    return json.dumps(model_to_json(model), indent=2, sort_keys=True)


def model_loads(text: str):
    return model_from_json(json.loads(text))
