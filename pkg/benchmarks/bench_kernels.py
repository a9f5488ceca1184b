"""Benchmark the compiled kernel core against the pure-NumPy fallback.

Run:  python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from hermix.kernels import _ref, hermite_recurrence_tables
from hermix.polyalg import monomial_basis

try:
    from hermix.kernels import _core
except ImportError:
    _core = None


def _time(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_hermite(impl, samples, m_max):
    n, d = samples.shape
    tables = hermite_recurrence_tables(d, m_max)
    out = [np.ones((n, 1)), samples.copy()]
    for m in range(2, m_max + 1):
        lin, quad = tables[m]
        cur = np.zeros((n, lin.shape[0]))
        impl.hermite_degree_step(samples, out[m - 1], out[m - 2], lin, quad, float(m - 1), cur)
        out.append(cur)
    return out


def bench_poly(impl, points, exps, coeffs):
    out = np.zeros(points.shape[0])
    impl.poly_eval(points, exps, coeffs, out)
    return out


def bench_logpdf(impl, points, mean, chol_inv):
    out = np.empty(points.shape[0])
    impl.gaussian_logpdf(points, mean, chol_inv, -1.83, out)
    return out


def main():
    rng = np.random.default_rng(0)
    rows = []
    for d, m_max, n in [(2, 8, 200_000), (4, 6, 100_000)]:
        samples = np.ascontiguousarray(rng.standard_normal((n, d)))
        basis = monomial_basis(d, 6)
        exps = np.ascontiguousarray(np.array(basis, dtype=np.int64))
        coeffs = np.ascontiguousarray(rng.standard_normal(len(basis)))
        mean = rng.standard_normal(d)
        chol_inv = np.ascontiguousarray(np.linalg.inv(np.linalg.cholesky(np.eye(d) * 1.3)))

        cases = [
            (f"hermite features d={d} m={m_max} n={n}", lambda impl: bench_hermite(impl, samples, m_max)),
            (f"poly eval d={d} deg=6 n={n}", lambda impl: bench_poly(impl, samples, exps, coeffs)),
            (f"gaussian logpdf d={d} n={n}", lambda impl: bench_logpdf(impl, samples, mean, chol_inv)),
        ]
        for name, fn in cases:
            t_ref = _time(lambda: fn(_ref))
            if _core is not None:
                t_core = _time(lambda: fn(_core))
                a = fn(_ref)
                b = fn(_core)
                if isinstance(a, list):
                    ok = all(np.allclose(x, y, rtol=1e-12, atol=1e-12) for x, y in zip(a, b))
                else:
                    ok = np.allclose(a, b, rtol=1e-12, atol=1e-12)
                rows.append((name, t_ref, t_core, t_ref / t_core, "ok" if ok else "MISMATCH"))
            else:
                rows.append((name, t_ref, float("nan"), float("nan"), "no ext"))

    print(f"{'kernel':45s} {'numpy (s)':>10s} {'compiled (s)':>13s} {'speedup':>8s}  agree")
    for name, t_ref, t_core, speed, ok in rows:
        print(f"{name:45s} {t_ref:10.4f} {t_core:13.4f} {speed:8.2f}  {ok}")


if __name__ == "__main__":
    main()
