"""Truncated power series in y and the differential operators that drive
Hermite-moment recurrences.

A k-component mixture's generating series sum_m h_m(X) y^m / m! is
annihilated by a composition of first-order operators d/dy - (a(X) + b(X) y),
one per component with doubling multiplicities.  Expanding that composition
into sum_j R_j(X, y) d^j yields recurrence coefficients R_{j,l}(X) that let
later moment polynomials be computed from earlier ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .hermite import GaussianMixture
from .polyalg import Polynomial, poly_mul, series_coeff_norm

__all__ = [
    "PowerSeries",
    "LinearDiffOp",
    "ExpandedOperator",
    "apply_linear_op",
    "apply_expanded_op",
    "compose_expand",
    "mixture_recurrence",
    "extend_by_recurrence",
    "recurrence_residuals",
]


@dataclass(frozen=True)
class PowerSeries:
    """Series sum_j terms[j] y^j / j!, truncated after order ``order``."""

    dim: int
    terms: tuple[Polynomial, ...]

    def __post_init__(self):
        for f in self.terms:
            if f.dim != self.dim:
                raise ValueError("dimension mismatch in series terms")

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    @staticmethod
    def from_exponential(a: Polynomial, b: Polynomial, order: int) -> "PowerSeries":
        """Series of exp(a(X) y + (1/2) b(X) y^2) up to the given order."""
        from .hermite import _exp_primary_terms

        return PowerSeries(a.dim, tuple(_exp_primary_terms(a, b, order)))

    def coeff_norm(self) -> float:
        return series_coeff_norm([f for f in self.terms if not f.is_zero()])


@dataclass(frozen=True)
class LinearDiffOp:
    """The operator d/dy - (a(X) + b(X) y) with a linear and b quadratic."""

    a: Polynomial
    b: Polynomial

    def __post_init__(self):
        if self.a.dim != self.b.dim:
            raise ValueError("dimension mismatch")
        if not self.a.is_zero() and not (self.a.is_homogeneous() and self.a.degree() == 1):
            raise ValueError("a must be homogeneous of degree 1")
        if not self.b.is_zero() and not (self.b.is_homogeneous() and self.b.degree() == 2):
            raise ValueError("b must be homogeneous of degree 2")

    @property
    def dim(self) -> int:
        return self.a.dim


def apply_linear_op(op: LinearDiffOp, s: PowerSeries) -> PowerSeries:
    """Apply d/dy - (a + b y); output truncation drops by one.

    Primary terms map to f_{j+1} - a f_j - j b f_{j-1}.
    """
    if s.order < 1:
        raise ValueError("series truncation too short to differentiate")
    out = []
    for j in range(s.order):
        t = s.terms[j + 1] - poly_mul(op.a, s.terms[j])
        if j >= 1:
            t = t - poly_mul(op.b, s.terms[j - 1]).scale(j)
        out.append(t)
    return PowerSeries(s.dim, tuple(out))


class ExpandedOperator:
    """Order-kappa operator d^kappa + sum_{j<kappa} R_j(X, y) d^j.

    ``coeffs[(j, l)]`` holds R_{j,l}(X), the coefficient of y^l in R_j, which
    is homogeneous of degree kappa - j + l; R_{kappa,0} = 1.
    """

    def __init__(self, dim: int, order: int, coeffs: dict[tuple[int, int], Polynomial]):
        self.dim = dim
        self.order = order
        clean: dict[tuple[int, int], Polynomial] = {}
        for (j, l), p in coeffs.items():
            if p.is_zero():
                continue
            if not (0 <= j <= order and 0 <= l <= order - j):
                raise ValueError(f"coefficient index ({j},{l}) out of range")
            if not p.is_homogeneous() or p.degree() != order - j + l:
                raise ValueError(
                    f"R[{j},{l}] must be homogeneous of degree {order - j + l}"
                )
            clean[(j, l)] = p
        top = clean.get((order, 0))
        if top is None or not top.allclose(Polynomial.constant(dim, 1.0)):
            raise ValueError("leading coefficient R[order,0] must be 1")
        self.coeffs = clean

    def coeff(self, j: int, l: int) -> Polynomial:
        return self.coeffs.get((j, l), Polynomial.zero(self.dim))


def compose_expand(ops: list[LinearDiffOp]) -> ExpandedOperator:
    """Expand a composition of first-order operators, first-applied first.

    Induction step: composing d/dy - (a + b y) onto sum_j R_j d^j gives
    R'_j = R_{j-1} + dR_j/dy - (a + b y) R_j.
    """
    if not ops:
        raise ValueError("need at least one operator")
    dim = ops[0].dim
    one = Polynomial.constant(dim, 1.0)
    # R_j represented as {l: Polynomial}; start with the identity operator R_0 = 1
    rs: list[dict[int, Polynomial]] = [{0: one}]
    for op in ops:
        order = len(rs) - 1
        nxt: list[dict[int, Polynomial]] = [dict() for _ in range(order + 2)]
        for j in range(order + 1):
            rj = rs[j]
            # shift to d^{j+1}
            for l, p in rj.items():
                acc = nxt[j + 1]
                acc[l] = acc.get(l, Polynomial.zero(dim)) + p
            # y-derivative stays at d^j
            for l, p in rj.items():
                if l >= 1:
                    acc = nxt[j]
                    acc[l - 1] = acc.get(l - 1, Polynomial.zero(dim)) + p.scale(l)
            # -(a + b y) R_j stays at d^j
            for l, p in rj.items():
                acc = nxt[j]
                acc[l] = acc.get(l, Polynomial.zero(dim)) - poly_mul(op.a, p)
                acc[l + 1] = acc.get(l + 1, Polynomial.zero(dim)) - poly_mul(op.b, p)
        rs = nxt
    kappa = len(rs) - 1
    coeffs = {}
    for j, rj in enumerate(rs):
        for l, p in rj.items():
            coeffs[(j, l)] = p
    return ExpandedOperator(dim, kappa, coeffs)


def apply_expanded_op(op: ExpandedOperator, s: PowerSeries) -> PowerSeries:
    """Apply the expanded operator term-by-term; truncation drops by order.

    y^l d^j sends sum_i f_i y^i / i! to sum_i f_{i+j} y^{i+l} / i!, so the
    output primary term at index a collects R_{j,l} f_{a-l+j} a!/(a-l)!.
    """
    kappa = op.order
    if s.order < kappa:
        raise ValueError("series truncation too short")
    out_order = s.order - kappa
    out = []
    for a in range(out_order + 1):
        # coefficient of y^a in op(s), times a!
        tot = Polynomial.zero(s.dim)
        for (j, l), r in op.coeffs.items():
            # y^l d^j sends sum f_i y^i/i! to sum f_{i+j} y^{i+l} / i!;
            # the y^a coefficient picks i = a - l, scaled by a!/(a-l)!.
            i = a - l
            if i < 0:
                continue
            src = i + j
            fall = math.factorial(a) // math.factorial(i)
            tot = tot + poly_mul(r, s.terms[src]).scale(float(fall))
        out.append(tot)
    return PowerSeries(s.dim, tuple(out))


def component_operator(mean, sigma_dev) -> LinearDiffOp:
    """The annihilating factor for N(mu, I + S): d/dy - (mu(X) + S(X) y)."""
    return LinearDiffOp(Polynomial.from_linear(mean), Polynomial.from_quadratic(sigma_dev))


def mixture_recurrence(mix: GaussianMixture, weight_degree: int = 0) -> ExpandedOperator:
    """Expanded operator annihilating the mixture's generating series.

    Component j's factor gets multiplicity (weight_degree + 1) 2^{j-1}; total
    order (weight_degree + 1)(2^k - 1).  Plain mixtures use weight_degree 0.
    """
    ops = []
    for j, g in enumerate(mix.components):
        mult = (weight_degree + 1) * (1 << j)
        ops.extend([component_operator(g.mean, g.sigma_dev())] * mult)
    return compose_expand(ops)


def recurrence_residuals(op: ExpandedOperator, h: list[Polynomial]) -> list[Polynomial]:
    """Residual polynomials of the recurrence on moment estimates h_0..h_m.

    Residual at shift a (kappa <= a <= m) is
    sum_{j,l} h_{a-kappa+j-l} R_{j,l} / (a-kappa-l)!, with negative factorials
    dropping the term; identically zero on exact moments of an annihilated
    series.
    """
    kappa = op.order
    m = len(h) - 1
    out = []
    for a in range(kappa, m + 1):
        tot = Polynomial.zero(op.dim)
        for (j, l), r in op.coeffs.items():
            if a - kappa - l < 0:
                continue
            idx = a - kappa + j - l
            if idx < 0 or idx > m:
                continue
            tot = tot + poly_mul(r, h[idx]).scale(1.0 / math.factorial(a - kappa - l))
        out.append(tot)
    return out


def extend_by_recurrence(op: ExpandedOperator, h: list[Polynomial]) -> list[Polynomial]:
    """Extend moment estimates h_0..h_m to h_{m+1}..h_{2m} via the recurrence.

    Each new term is the unique solution given the normalization R_{kappa,0}=1:
    h_a = -(a-kappa)! sum_{j<kappa, l} h_{a-kappa+j-l} R_{j,l} / (a-kappa-l)!.
    """
    kappa = op.order
    m = len(h) - 1
    if m < kappa:
        raise ValueError(f"need at least {kappa + 1} known terms, got {m + 1}")
    known = list(h)
    for a in range(m + 1, 2 * m + 1):
        tot = Polynomial.zero(op.dim)
        for (j, l), r in op.coeffs.items():
            if j == kappa:
                continue
            if a - kappa - l < 0:
                continue
            idx = a - kappa + j - l
            if idx < 0:
                continue
            scale = math.factorial(a - kappa) / math.factorial(a - kappa - l)
            tot = tot + poly_mul(r, known[idx]).scale(scale)
        known.append(tot.scale(-1.0))
    return known[m + 1 :]
