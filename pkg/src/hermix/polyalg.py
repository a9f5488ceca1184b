"""Sparse multivariate polynomial arithmetic with tensor-norm semantics.

A homogeneous degree-m polynomial in d variables corresponds to a unique
symmetric order-m coefficient tensor.  We never materialize the d**m tensor;
instead every monomial coefficient carries a multinomial weight so that norms
and inner products computed on the sparse representation agree exactly with
the flattened-tensor ones.  Monomials are ordered graded-lexicographically
everywhere (serialization, basis enumeration, feature vectors).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "Polynomial",
    "BiPolynomial",
    "CompactMatrix",
    "monomial_basis",
    "multinomial",
    "poly_mul",
    "coeff_norm",
    "series_coeff_norm",
    "linear_substitute",
    "affine_substitute",
    "sym_tensorize",
    "sym_op_norm",
]

def multinomial(idx: tuple[int, ...]) -> int:
    """Number of index sequences collapsing to the monomial ``idx``."""
    out = math.factorial(sum(idx))
    for a in idx:
        out //= math.factorial(a)
    return out


@lru_cache(maxsize=None)
def monomial_basis(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """All degree-``degree`` exponent tuples in ``dim`` variables, graded-lex.

    Within one degree, graded-lex means lexicographically decreasing exponent
    tuples: (2,0) > (1,1) > (0,2).
    """
    if dim == 1:
        return ((degree,),)
    out = []
    for first in range(degree, -1, -1):
        for rest in monomial_basis(dim - 1, degree - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _basis_index(dim: int, degree: int) -> dict[tuple[int, ...], int]:
    return {m: i for i, m in enumerate(monomial_basis(dim, degree))}


class Polynomial:
    """Immutable sparse polynomial: exponent tuple -> coefficient.

    All exponent tuples have length ``dim``; zero coefficients are dropped.
    """

    __slots__ = ("dim", "terms", "_hash")

    def __init__(self, dim: int, terms: dict | None = None):
        clean = {}
        if terms:
            for idx, c in terms.items():
                idx = tuple(int(a) for a in idx)
                if len(idx) != dim:
                    raise ValueError(f"exponent {idx} has length != dim={dim}")
                if any(a < 0 for a in idx):
                    raise ValueError(f"negative exponent in {idx}")
                c = float(c)
                if c != 0.0:
                    clean[idx] = clean.get(idx, 0.0) + c
            clean = {i: c for i, c in clean.items() if c != 0.0}
        self.dim = dim
        self.terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------
    @staticmethod
    def zero(dim: int) -> "Polynomial":
        return Polynomial(dim, {})

    @staticmethod
    def constant(dim: int, c: float) -> "Polynomial":
        return Polynomial(dim, {(0,) * dim: c})

    @staticmethod
    def variable(dim: int, i: int) -> "Polynomial":
        e = [0] * dim
        e[i] = 1
        return Polynomial(dim, {tuple(e): 1.0})

    @staticmethod
    def from_linear(vec) -> "Polynomial":
        """mu -> the linear form mu . X."""
        vec = np.asarray(vec, dtype=float)
        d = vec.shape[0]
        terms = {}
        for i, c in enumerate(vec):
            if c != 0.0:
                e = [0] * d
                e[i] = 1
                terms[tuple(e)] = float(c)
        return Polynomial(d, terms)

    @staticmethod
    def from_quadratic(mat) -> "Polynomial":
        """M -> the quadratic form X^T M X."""
        mat = np.asarray(mat, dtype=float)
        d = mat.shape[0]
        terms: dict[tuple[int, ...], float] = {}
        for i in range(d):
            for j in range(d):
                c = float(mat[i, j])
                if c == 0.0:
                    continue
                e = [0] * d
                e[i] += 1
                e[j] += 1
                key = tuple(e)
                terms[key] = terms.get(key, 0.0) + c
        return Polynomial(d, terms)

    # -- queries -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; zero polynomial reports 0."""
        return max((sum(i) for i in self.terms), default=0)

    def is_homogeneous(self) -> bool:
        degs = {sum(i) for i in self.terms}
        return len(degs) <= 1

    def homogeneous_part(self, degree: int) -> "Polynomial":
        return Polynomial(
            self.dim, {i: c for i, c in self.terms.items() if sum(i) == degree}
        )

    def coefficient(self, idx: tuple[int, ...]) -> float:
        return self.terms.get(tuple(idx), 0.0)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        tot = 0.0
        for idx, c in sorted(self.terms.items(), reverse=True):
            tot += c * float(np.prod(x**np.array(idx)))
        return tot

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate at each row of ``pts`` (n, dim)."""
        from . import kernels

        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        items = sorted(self.terms.items(), reverse=True)
        exps = np.array([i for i, _ in items], dtype=np.int64).reshape(len(items), self.dim)
        coeffs = np.array([c for _, c in items])
        return kernels.poly_eval(pts, exps, coeffs)

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        terms = dict(self.terms)
        for i, c in other.terms.items():
            terms[i] = terms.get(i, 0.0) + c
        return Polynomial(self.dim, terms)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def scale(self, c: float) -> "Polynomial":
        return Polynomial(self.dim, {i: v * c for i, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        return poly_mul(self, other)

    __rmul__ = __mul__

    def power(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.dim, 1.0)
        for _ in range(n):
            out = poly_mul(out, self)
        return out

    # -- vector views ----------------------------------------------------
    def compact_vector(self, degree: int | None = None) -> np.ndarray:
        """Coordinates of v(f) in the orthonormal weighted-monomial basis.

        Entry for monomial a is coeff(a)/sqrt(mult(a)); the Euclidean norm of
        this vector equals the Frobenius norm of the flattened symmetric
        coefficient tensor.  Requires a homogeneous polynomial.
        """
        if not self.is_homogeneous():
            raise ValueError("compact_vector requires a homogeneous polynomial")
        if degree is None:
            degree = self.degree()
        basis = monomial_basis(self.dim, degree)
        out = np.zeros(len(basis))
        index = _basis_index(self.dim, degree)
        for idx, c in self.terms.items():
            out[index[idx]] = c / math.sqrt(multinomial(idx))
        return out

    @staticmethod
    def from_compact_vector(vec, dim: int, degree: int) -> "Polynomial":
        basis = monomial_basis(dim, degree)
        terms = {}
        for i, m in enumerate(basis):
            c = float(vec[i]) * math.sqrt(multinomial(m))
            if c != 0.0:
                terms[m] = c
        return Polynomial(dim, terms)

    # -- plumbing --------------------------------------------------------
    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.dim == other.dim
            and self.terms == other.terms
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        if not self.terms:
            return "Poly(0)"
        bits = []
        for idx, c in sorted(self.terms.items(), key=lambda t: (sum(t[0]), tuple(-e for e in t[0]))):
            mono = "*".join(f"x{i}^{a}" if a > 1 else f"x{i}" for i, a in enumerate(idx) if a)
            bits.append(f"{c:+g}" + (f"*{mono}" if mono else ""))
        return "Poly(" + " ".join(bits) + ")"

    def allclose(self, other: "Polynomial", rtol: float = 1e-10, atol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        scale = max(
            (abs(c) for c in list(self.terms.values()) + list(other.terms.values())),
            default=0.0,
        )
        return all(
            abs(self.terms.get(k, 0.0) - other.terms.get(k, 0.0)) <= atol + rtol * scale
            for k in keys
        )


def poly_mul(f: Polynomial, g: Polynomial) -> Polynomial:
    """Exact product; homogeneous degrees add."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    terms: dict[tuple[int, ...], float] = {}
    for i1, c1 in f.terms.items():
        for i2, c2 in g.terms.items():
            key = tuple(a + b for a, b in zip(i1, i2))
            terms[key] = terms.get(key, 0.0) + c1 * c2
    return Polynomial(f.dim, terms)


def coeff_norm(f: Polynomial) -> float:
    """L2 norm of the flattened symmetric coefficient tensor of ``f``.

    Computed as sqrt(sum c_a^2 / mult(a)); bit-equal to flattening the full
    tensor because the tensor spreads c_a over mult(a) equal entries.
    """
    if not f.is_homogeneous():
        raise ValueError("coeff_norm requires a homogeneous polynomial")
    return math.sqrt(sum(c * c / multinomial(i) for i, c in f.terms.items()))


def series_coeff_norm(fs) -> float:
    """Norm of the concatenation of the coefficient vectors of ``fs``."""
    return math.sqrt(sum(coeff_norm(f) ** 2 for f in fs))


def linear_substitute(f: Polynomial, mat) -> Polynomial:
    """Return f(M X)."""
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (f.dim, f.dim):
        raise ValueError("dimension mismatch")
    return affine_substitute(f, mat, np.zeros(f.dim))


def affine_substitute(f: Polynomial, mat, shift) -> Polynomial:
    """Return f(M x + b) as a polynomial in x."""
    mat = np.asarray(mat, dtype=float)
    shift = np.asarray(shift, dtype=float)
    d = f.dim
    if mat.shape != (d, d) or shift.shape != (d,):
        raise ValueError("dimension mismatch")
    # images of each variable, as degree <= 1 polynomials
    images = []
    for i in range(d):
        t = {(0,) * d: float(shift[i])}
        for j in range(d):
            if mat[i, j] != 0.0:
                e = [0] * d
                e[j] = 1
                t[tuple(e)] = float(mat[i, j])
        images.append(Polynomial(d, t))
    # memoized powers per variable
    pow_cache: dict[tuple[int, int], Polynomial] = {}

    def img_pow(i: int, a: int) -> Polynomial:
        key = (i, a)
        if key not in pow_cache:
            pow_cache[key] = images[i].power(a)
        return pow_cache[key]

    out = Polynomial.zero(d)
    for idx, c in f.terms.items():
        term = Polynomial.constant(d, c)
        for i, a in enumerate(idx):
            if a:
                term = poly_mul(term, img_pow(i, a))
        out = out + term
    return out


class BiPolynomial:
    """Sparse polynomial in two groups of d variables each."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: dict | None = None):
        clean = {}
        if terms:
            for (i1, i2), c in terms.items():
                i1, i2 = tuple(i1), tuple(i2)
                if len(i1) != dim or len(i2) != dim:
                    raise ValueError("index length != dim")
                c = float(c)
                if c != 0.0:
                    clean[(i1, i2)] = clean.get((i1, i2), 0.0) + c
            clean = {k: c for k, c in clean.items() if c != 0.0}
        self.dim = dim
        self.terms = clean

    @staticmethod
    def zero(dim: int) -> "BiPolynomial":
        return BiPolynomial(dim, {})

    @staticmethod
    def dot_product(dim: int) -> "BiPolynomial":
        """X1 . X2."""
        terms = {}
        for i in range(dim):
            e = [0] * dim
            e[i] = 1
            terms[(tuple(e), tuple(e))] = 1.0
        return BiPolynomial(dim, terms)

    @staticmethod
    def outer(p: Polynomial, q: Polynomial) -> "BiPolynomial":
        """p(X1) * q(X2)."""
        if p.dim != q.dim:
            raise ValueError("dimension mismatch")
        terms = {}
        for i1, c1 in p.terms.items():
            for i2, c2 in q.terms.items():
                terms[(i1, i2)] = terms.get((i1, i2), 0.0) + c1 * c2
        return BiPolynomial(p.dim, terms)

    @staticmethod
    def from_symmetric_expansion(f: Polynomial) -> "BiPolynomial":
        """f(X1 + X2), expanded over the two variable groups."""
        d = f.dim
        terms: dict[tuple[tuple, tuple], float] = {}
        for idx, c in f.terms.items():
            # split each exponent a_i into b_i + (a_i - b_i) with binomials
            splits = [[(b, math.comb(a, b)) for b in range(a + 1)] for a in idx]
            stack = [((), (), c)]
            for i, choices in enumerate(splits):
                nxt = []
                for i1, i2, cc in stack:
                    for b, binom in choices:
                        nxt.append((i1 + (b,), i2 + (idx[i] - b,), cc * binom))
                stack = nxt
            for i1, i2, cc in stack:
                key = (i1, i2)
                terms[key] = terms.get(key, 0.0) + cc
        return BiPolynomial(d, terms)

    def is_bihomogeneous(self) -> bool:
        degs = {(sum(i1), sum(i2)) for i1, i2 in self.terms}
        return len(degs) <= 1

    def bidegree(self) -> tuple[int, int]:
        if not self.terms:
            return (0, 0)
        (i1, i2) = next(iter(self.terms))
        return (sum(i1), sum(i2))

    def bidegree_part(self, m1: int, m2: int) -> "BiPolynomial":
        return BiPolynomial(
            self.dim,
            {k: c for k, c in self.terms.items() if sum(k[0]) == m1 and sum(k[1]) == m2},
        )

    def __add__(self, other: "BiPolynomial") -> "BiPolynomial":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0.0) + c
        return BiPolynomial(self.dim, terms)

    def scale(self, c: float) -> "BiPolynomial":
        return BiPolynomial(self.dim, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        terms: dict[tuple[tuple, tuple], float] = {}
        for (a1, a2), c1 in self.terms.items():
            for (b1, b2), c2 in other.terms.items():
                key = (
                    tuple(x + y for x, y in zip(a1, b1)),
                    tuple(x + y for x, y in zip(a2, b2)),
                )
                terms[key] = terms.get(key, 0.0) + c1 * c2
        return BiPolynomial(self.dim, terms)

    __rmul__ = __mul__

    def power(self, n: int) -> "BiPolynomial":
        out = BiPolynomial(self.dim, {((0,) * self.dim, (0,) * self.dim): 1.0})
        for _ in range(n):
            out = out * self
        return out


@dataclass(frozen=True)
class CompactMatrix:
    """T_sym of a bi-homogeneous polynomial in the weighted monomial basis.

    Entry (a, b) holds c_{a,b} / sqrt(mult(a) mult(b)); singular values agree
    with the full d^{m1} x d^{m2} symmetrized matrix because the weighted
    monomial indicator vectors are orthonormal.
    """

    dim: int
    row_degree: int
    col_degree: int
    data: np.ndarray = field(repr=False)

    @property
    def row_basis(self):
        return monomial_basis(self.dim, self.row_degree)

    @property
    def col_basis(self):
        return monomial_basis(self.dim, self.col_degree)

    def op_norm(self) -> float:
        if self.data.size == 0:
            return 0.0
        return float(np.linalg.norm(self.data, 2))


def sym_tensorize(p: BiPolynomial) -> CompactMatrix:
    """Compact symmetric tensorization of a bi-homogeneous polynomial."""
    if not p.is_bihomogeneous():
        raise ValueError("sym_tensorize requires a bi-homogeneous polynomial")
    m1, m2 = p.bidegree()
    rows = _basis_index(p.dim, m1)
    cols = _basis_index(p.dim, m2)
    data = np.zeros((len(rows), len(cols)))
    for (i1, i2), c in p.terms.items():
        w = math.sqrt(multinomial(i1) * multinomial(i2))
        data[rows[i1], cols[i2]] = c / w
    return CompactMatrix(p.dim, m1, m2, data)


def sym_op_norm(p: BiPolynomial) -> float:
    """Operator norm of the symmetric tensorization of ``p``."""
    return sym_tensorize(p).op_norm()
