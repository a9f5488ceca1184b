# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled hot loops; see hermix.kernels for the dispatch layer."""


def hermite_degree_step(
    double[:, ::1] samples,
    double[:, ::1] prev1,
    double[:, ::1] prev2,
    long[:, ::1] lin,
    long[:, ::1] quad,
    double fac,
    double[:, ::1] out,
):
    cdef Py_ssize_t n = samples.shape[0]
    cdef Py_ssize_t d = samples.shape[1]
    cdef Py_ssize_t n_terms = lin.shape[0]
    cdef Py_ssize_t s, t, i
    cdef long j
    cdef double acc
    for s in range(n):
        for t in range(n_terms):
            acc = 0.0
            for i in range(d):
                j = lin[t, i]
                if j >= 0:
                    acc += samples[s, i] * prev1[s, j]
                j = quad[t, i]
                if j >= 0:
                    acc -= fac * prev2[s, j]
            out[s, t] = acc


def poly_eval(
    double[:, ::1] points,
    long[:, ::1] exps,
    double[::1] coeffs,
    double[::1] out,
):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t n_terms = coeffs.shape[0]
    cdef Py_ssize_t s, t, i
    cdef long e
    cdef double term, tot
    for s in range(n):
        tot = out[s]
        for t in range(n_terms):
            term = coeffs[t]
            for i in range(d):
                e = exps[t, i]
                while e > 0:
                    term *= points[s, i]
                    e -= 1
            tot += term
        out[s] = tot


def gaussian_logpdf(
    double[:, ::1] points,
    double[::1] mean,
    double[:, ::1] chol_inv,
    double log_norm,
    double[::1] out,
):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t s, i, j
    cdef double acc, q
    for s in range(n):
        q = 0.0
        for i in range(d):
            acc = 0.0
            for j in range(d):
                acc += chol_inv[i, j] * (points[s, j] - mean[j])
            q += acc * acc
        out[s] = log_norm - 0.5 * q
