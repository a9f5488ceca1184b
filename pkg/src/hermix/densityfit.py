"""Fit a polynomial-Gaussian distribution matching estimated moment polynomials.

Given rough component estimates N(mu_j, I+S_j) and moment estimates h'_0..h'_m,
solve for constants c_j and correction polynomials P_j (P_j(0) = 0) so the
combination sum_j (c_j + P_j(Xy)) exp(mu_j(X) y + S_j(X) y^2 / 2) reproduces
the moments; everything is linear in the unknowns, so this is constrained
linear least squares.  Inverting to density space gives weight polynomials
c_j + R_j(x); adding R_j^{2B} / c_j^{2B-1} makes them pointwise nonnegative
(1 + u + u^{2B} >= 0 for all real u), and dividing by the exact integral
yields a distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charfunc import GenCombination, invert_combination
from .hermite import Gaussian, MPGModel, _exp_primary_terms, gaussian_expectation
from .polyalg import Polynomial, monomial_basis, multinomial, poly_mul

__all__ = [
    "RegularFormFit",
    "fit_generating_combination",
    "to_distribution",
    "gaussian_poly_integral",
]


@dataclass
class RegularFormFit:
    rough: list[Gaussian]
    constants: np.ndarray
    gen_polys: list[Polynomial]  # corrections P_j in generating space
    density_polys: list[Polynomial] | None = None  # R_j after inversion
    model: MPGModel | None = None
    residuals: dict = field(default_factory=dict)


def gaussian_poly_integral(q: Polynomial, g: Gaussian) -> float:
    """Exact integral of q(x) times the Gaussian density."""
    return gaussian_expectation(q, g)


def _fit_design(
    h: list[Polynomial],
    rough: list[Gaussian],
    degree_cap: int,
    m_fit: int,
    degree_weights=None,
):
    """Design matrix for the linear map (c_j, P_j coefficients) -> moments."""
    dim = rough[0].dim
    k = len(rough)
    exp_terms = [
        _exp_primary_terms(
            Polynomial.from_linear(g.mean),
            Polynomial.from_quadratic(g.sigma_dev()),
            m_fit,
        )
        for g in rough
    ]

    monos = []  # correction monomials, degree >= 1
    for deg in range(1, degree_cap + 1):
        monos.extend(monomial_basis(dim, deg))
    n_unknowns = k + k * len(monos)

    blocks = []
    targets = []
    row_bases = [monomial_basis(dim, l) for l in range(m_fit + 1)]
    for l in range(m_fit + 1):
        basis = row_bases[l]
        index = {b: i for i, b in enumerate(basis)}
        wts = np.array([1.0 / math.sqrt(multinomial(b)) for b in basis])
        block = np.zeros((len(basis), n_unknowns))
        for j in range(k):
            # constant c_j contributes the exponential's primary term
            for idx, c in exp_terms[j][l].terms.items():
                block[index[idx], j] += c
            # monomial p x^alpha of P_j contributes x^alpha t_{l-D} l!/(l-D)!
            for mi, mono in enumerate(monos):
                D = sum(mono)
                if D > l:
                    continue
                col = k + j * len(monos) + mi
                fall = math.factorial(l) // math.factorial(l - D)
                for idx, c in exp_terms[j][l - D].terms.items():
                    tgt = tuple(x + y for x, y in zip(idx, mono))
                    block[index[tgt], col] += fall * c
        target = np.zeros(len(basis))
        for idx, c in h[l].terms.items():
            target[index[idx]] += c
        dw = 1.0 if degree_weights is None else float(degree_weights[l])
        blocks.append(block * (dw * wts[:, None]))
        targets.append(target * (dw * wts))
    return np.concatenate(blocks, axis=0), np.concatenate(targets), monos


def fit_generating_combination(
    h: list[Polynomial],
    rough: list[Gaussian],
    degree_cap: int = 2,
    theta: float = 0.05,
    m_fit: int | None = None,
    ridge: float | str = "auto",
    degree_weights=None,
) -> RegularFormFit:
    """Solve for (c_j, P_j) matching the moment estimates, with c_j >= theta.

    Minimizes the summed squared coefficient-vector mismatch over degrees
    0..m_fit plus a ridge penalty on the correction coefficients.  When the
    moment estimates carry known per-degree noise scales, pass their inverses
    as ``degree_weights`` so noisy degrees do not drag the fit.

    With ``ridge='auto'`` the penalty is chosen by a discrepancy rule: the
    largest ridge whose residual stays within 10% of the smallest achievable.
    Matched low moments leave the split between constants and corrections
    nearly unidentified, so among near-optimal fits we take the one with the
    smallest corrections (the corrections are a-priori small).  The bound
    c_j >= theta is handled by clamping violated constants and re-solving.
    """
    if m_fit is None:
        m_fit = len(h) - 1
    if m_fit > len(h) - 1:
        raise ValueError("m_fit exceeds available moment estimates")
    k = len(rough)
    A, b, monos = _fit_design(h, rough, degree_cap, m_fit, degree_weights)
    n_unknowns = A.shape[1]
    base = float(np.linalg.norm(A)) / math.sqrt(n_unknowns)

    def solve(sqrt_lam: float):
        reg = np.zeros(n_unknowns)
        reg[k:] = sqrt_lam
        A_full = np.vstack([A, np.diag(reg)[k:]])
        b_full = np.concatenate([b, np.zeros(n_unknowns - k)])
        fixed: dict[int, float] = {}
        x = np.zeros(n_unknowns)
        for _ in range(k + 1):
            free = [i for i in range(n_unknowns) if i not in fixed]
            rhs = b_full.copy()
            for i, v in fixed.items():
                rhs -= A_full[:, i] * v
            sol, *_ = np.linalg.lstsq(A_full[:, free], rhs, rcond=None)
            x = np.zeros(n_unknowns)
            x[free] = sol
            for i, v in fixed.items():
                x[i] = v
            violated = [j for j in range(k) if j not in fixed and x[j] < theta]
            if not violated:
                break
            for j in violated:
                fixed[j] = theta
        return x, float(np.linalg.norm(A @ x - b)), sorted(fixed)

    dim = rough[0].dim

    def unpack(x):
        constants = x[:k].copy()
        gen_polys = []
        for j in range(k):
            terms = {}
            for mi, mono in enumerate(monos):
                c = float(x[k + j * len(monos) + mi])
                if c != 0.0:
                    terms[mono] = c
            gen_polys.append(Polynomial(dim, terms))
        return constants, gen_polys

    if ridge == "auto":
        # score each ridge by moment residual plus the mass the positivity
        # repair will add; unchecked corrections can satisfy the moments while
        # inflating the repaired integral and ruining the density
        best = None
        for lam in [base * 10.0**e for e in range(2, -7, -1)]:
            x, resid, clamped = solve(lam)
            constants, gen_polys = unpack(x)
            total = _repaired_integral(rough, constants, gen_polys)
            score = resid + abs(total - 1.0)
            if best is None or score < best[0] - 1e-12:
                best = (score, lam, x, resid, clamped)
        _, chosen, x, resid, clamped = best
    else:
        chosen = math.sqrt(float(ridge)) * base
        x, resid, clamped = solve(chosen)

    constants, gen_polys = unpack(x)
    fit = RegularFormFit(
        rough=list(rough),
        constants=constants,
        gen_polys=gen_polys,
        residuals={
            "residual_norm": resid,
            "target_norm": float(np.linalg.norm(b)),
            "clamped": clamped,
            "ridge": chosen,
        },
    )
    return fit


def _invert_and_repair(rough, constants, gen_polys, repair_power=None):
    """Invert to density space and add the positivity term; no normalization."""
    degree_cap = max((p.degree() for p in gen_polys), default=0)
    B = repair_power if repair_power is not None else degree_cap + 1
    if B <= degree_cap:
        raise ValueError("repair power must exceed the correction degree")
    dim = rough[0].dim
    full_polys = tuple(
        Polynomial.constant(dim, float(c)) + p for c, p in zip(constants, gen_polys)
    )
    comb = GenCombination(
        polys=full_polys,
        means=tuple(g.mean for g in rough),
        sigma_devs=tuple(g.sigma_dev() for g in rough),
    )
    inverted = invert_combination(comb)
    weight_polys = []
    density_polys = []
    for q, c in zip(inverted.weight_polys, constants):
        r = q - Polynomial.constant(dim, float(c))
        density_polys.append(r)
        repair = r.power(2 * B).scale(1.0 / float(c) ** (2 * B - 1))
        weight_polys.append(q + repair)
    total = sum(
        gaussian_poly_integral(w, g)
        for w, g in zip(weight_polys, inverted.components)
    )
    return weight_polys, density_polys, inverted.components, float(total)


def _repaired_integral(rough, constants, gen_polys) -> float:
    try:
        return _invert_and_repair(rough, constants, gen_polys)[3]
    except (ValueError, np.linalg.LinAlgError):
        return float("inf")


def to_distribution(fit: RegularFormFit, repair_power: int | None = None) -> MPGModel:
    """Invert the fitted combination to density space and repair positivity.

    Component weight polynomials become c_j + R_j(x) + R_j(x)^{2B}/c_j^{2B-1},
    nonnegative for every x; the model is then divided by its exact integral.
    """
    weight_polys, density_polys, components, total = _invert_and_repair(
        fit.rough, fit.constants, fit.gen_polys, repair_power
    )
    if total <= 0:
        raise AssertionError("total integral must be positive for a repaired model")
    model = MPGModel(
        [w.scale(1.0 / total) for w in weight_polys],
        components,
        is_distribution=True,
    )
    fit.density_polys = density_polys
    fit.model = model
    fit.residuals["unnormalized_integral"] = total
    return model
