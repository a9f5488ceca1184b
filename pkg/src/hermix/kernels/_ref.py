"""Pure-NumPy reference implementations of the hot kernels.

Kept operation-for-operation parallel to the Cython core so the two backends
agree to floating-point roundoff; accumulation orders match where cheap.
"""

from __future__ import annotations

import numpy as np


def hermite_degree_step(samples, prev1, prev2, lin, quad, fac, out):
    n_terms, d = lin.shape
    for t in range(n_terms):
        acc = out[:, t]
        for i in range(d):
            s1 = lin[t, i]
            if s1 >= 0:
                acc += samples[:, i] * prev1[:, s1]
            s2 = quad[t, i]
            if s2 >= 0:
                acc -= fac * prev2[:, s2]


def poly_eval(points, exps, coeffs, out):
    for t in range(coeffs.shape[0]):
        term = np.full(points.shape[0], coeffs[t])
        for i in range(points.shape[1]):
            e = exps[t, i]
            for _ in range(e):
                term *= points[:, i]
        out += term


def gaussian_logpdf(points, mean, chol_inv, log_norm, out):
    w = (points - mean) @ chol_inv.T
    np.copyto(out, log_norm - 0.5 * np.einsum("ij,ij->i", w, w))
