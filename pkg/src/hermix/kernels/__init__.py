"""Hot numeric kernels: compiled core with a pure-NumPy fallback.

Three inner loops dominate end-to-end runtime: extracting Hermite feature
coefficients for every sample, evaluating sparse polynomials on point batches,
and Gaussian log-density evaluation on point batches.  A Cython extension
(``hermix.kernels._core``) implements them with explicit loops; if it is not
built, the vectorized NumPy reference (``hermix.kernels._ref``) is selected at
import time.  Set ``HERMIX_PURE_PYTHON=1`` to force the fallback.

Run ``python benchmarks/bench_kernels.py`` to compare the two backends.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache

import numpy as np

from ..polyalg import monomial_basis

from . import _ref

if os.environ.get("HERMIX_PURE_PYTHON"):
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _ref
        BACKEND = "python"

__all__ = [
    "BACKEND",
    "backend_name",
    "hermite_feature_coeffs",
    "poly_eval",
    "gaussian_logpdf",
    "hermite_recurrence_tables",
]


def backend_name() -> str:
    return BACKEND


@lru_cache(maxsize=None)
def hermite_recurrence_tables(dim: int, m_max: int):
    """Index tables driving the degree recurrence on coefficient arrays.

    For each degree m >= 2 and monomial g in the degree-m basis:
    ``lin[t, i]`` is the basis index of g - e_i at degree m-1 (or -1) and
    ``quad[t, i]`` the index of g - 2 e_i at degree m-2 (or -1), so that
    coeff_m[g] = sum_i z_i coeff_{m-1}[g - e_i] - (m-1) sum_i coeff_{m-2}[g - 2 e_i].
    """
    tables = {}
    for m in range(2, m_max + 1):
        basis = monomial_basis(dim, m)
        idx1 = {b: i for i, b in enumerate(monomial_basis(dim, m - 1))}
        idx2 = {b: i for i, b in enumerate(monomial_basis(dim, m - 2))}
        lin = np.full((len(basis), dim), -1, dtype=np.int64)
        quad = np.full((len(basis), dim), -1, dtype=np.int64)
        for t, g in enumerate(basis):
            for i in range(dim):
                if g[i] >= 1:
                    down = list(g)
                    down[i] -= 1
                    lin[t, i] = idx1[tuple(down)]
                if g[i] >= 2:
                    down = list(g)
                    down[i] -= 2
                    quad[t, i] = idx2[tuple(down)]
        tables[m] = (lin, quad)
    return tables


def hermite_feature_coeffs(samples: np.ndarray, m_max: int) -> list[np.ndarray]:
    """Raw monomial coefficients of H_m(X, z_i) for every sample and m <= m_max.

    Returns one (n, n_monomials_m) array per degree, columns in graded-lex
    basis order.
    """
    samples = np.ascontiguousarray(np.atleast_2d(samples), dtype=np.float64)
    n, d = samples.shape
    out = [np.ones((n, 1))]
    if m_max == 0:
        return out
    out.append(samples.copy())
    tables = hermite_recurrence_tables(d, m_max)
    for m in range(2, m_max + 1):
        lin, quad = tables[m]
        cur = np.zeros((n, lin.shape[0]))
        _impl.hermite_degree_step(
            samples, out[m - 1], out[m - 2], lin, quad, float(m - 1), cur
        )
        out.append(cur)
    return out


def poly_eval(points: np.ndarray, exps: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Evaluate sum_t coeffs[t] * x^exps[t] at each row of ``points``."""
    points = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
    exps = np.ascontiguousarray(exps, dtype=np.int64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    out = np.zeros(points.shape[0])
    if coeffs.shape[0]:
        _impl.poly_eval(points, exps, coeffs, out)
    return out


def gaussian_logpdf(
    points: np.ndarray, mean: np.ndarray, chol_inv: np.ndarray, log_norm: float
) -> np.ndarray:
    """Gaussian log-density with precomputed inverse Cholesky factor."""
    points = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
    mean = np.ascontiguousarray(mean, dtype=np.float64)
    chol_inv = np.ascontiguousarray(chol_inv, dtype=np.float64)
    out = np.empty(points.shape[0])
    _impl.gaussian_logpdf(points, mean, chol_inv, float(log_norm), out)
    return out
