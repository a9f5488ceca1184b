"""Polynomial arithmetic and tensor-norm semantics."""

import itertools
import math

import numpy as np
import pytest

from hermix.polyalg import (
    BiPolynomial,
    Polynomial,
    coeff_norm,
    linear_substitute,
    monomial_basis,
    multinomial,
    poly_mul,
    series_coeff_norm,
    sym_op_norm,
    sym_tensorize,
)


def rand_poly(rng, dim, degree):
    return Polynomial(dim, {m: rng.standard_normal() for m in monomial_basis(dim, degree)})


def brute_force_tensor(f: Polynomial) -> np.ndarray:
    """Materialize the full symmetric coefficient tensor of a homogeneous f."""
    m = f.degree()
    d = f.dim
    t = np.zeros((d,) * m) if m else np.zeros(())
    if m == 0:
        t[()] = f.coefficient((0,) * d)
        return t
    for seq in itertools.product(range(d), repeat=m):
        idx = [0] * d
        for i in seq:
            idx[i] += 1
        c = f.coefficient(tuple(idx))
        if c:
            t[seq] = c / multinomial(tuple(idx))
    return t


class TestPolyMul:
    def test_simple_product(self):
        x1 = Polynomial.variable(2, 0)
        x2 = Polynomial.variable(2, 1)
        assert poly_mul(x1, x2) == Polynomial(2, {(1, 1): 1.0})

    def test_identity_element(self):
        f = Polynomial(1, {(2,): 1.0, (0,): -1.0})
        one = Polynomial.constant(1, 1.0)
        assert poly_mul(f, one) == f

    def test_difference_of_squares(self):
        s = Polynomial(2, {(1, 0): 1.0, (0, 1): 1.0})
        t = Polynomial(2, {(1, 0): 1.0, (0, 1): -1.0})
        assert poly_mul(s, t) == Polynomial(2, {(2, 0): 1.0, (0, 2): -1.0})

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            poly_mul(Polynomial.variable(1, 0), Polynomial.variable(2, 0))

    def test_ring_laws_random(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            d = rng.integers(1, 4)
            f = rand_poly(rng, d, rng.integers(0, 3))
            g = rand_poly(rng, d, rng.integers(0, 3))
            h = rand_poly(rng, d, rng.integers(0, 3))
            assert poly_mul(f, g).allclose(poly_mul(g, f), rtol=1e-14)
            assert poly_mul(poly_mul(f, g), h).allclose(poly_mul(f, poly_mul(g, h)))
            assert poly_mul(f, g + h).allclose(poly_mul(f, g) + poly_mul(f, h))


class TestCoeffNorm:
    def test_single_monomial(self):
        assert coeff_norm(Polynomial(2, {(2, 0): 1.0})) == 1.0

    def test_cross_term_matches_explicit_tensor(self):
        # x1 x2 spreads over two tensor entries of 1/2 each
        f = Polynomial(2, {(1, 1): 1.0})
        explicit = np.array([[0.0, 0.5], [0.5, 0.0]])
        assert coeff_norm(f) == pytest.approx(np.linalg.norm(explicit), abs=1e-15)
        assert coeff_norm(f) == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_scaling(self):
        assert coeff_norm(Polynomial(1, {(1,): 3.0})) == 3.0

    def test_rejects_inhomogeneous(self):
        with pytest.raises(ValueError):
            coeff_norm(Polynomial(1, {(0,): 1.0, (1,): 1.0}))

    def test_matches_brute_force_flattening(self):
        rng = np.random.default_rng(11)
        for d in (1, 2, 3):
            for deg in (1, 2, 3, 4):
                f = rand_poly(rng, d, deg)
                assert coeff_norm(f) == pytest.approx(
                    np.linalg.norm(brute_force_tensor(f).ravel()), rel=1e-12
                )


class TestSeriesCoeffNorm:
    def test_constant(self):
        assert series_coeff_norm([Polynomial.constant(1, 1.0)]) == 1.0

    def test_concatenation(self):
        fs = [Polynomial.variable(2, 0), Polynomial.variable(2, 1)]
        assert series_coeff_norm(fs) == pytest.approx(math.sqrt(2))

    def test_empty(self):
        assert series_coeff_norm([]) == 0.0


class TestLinearSubstitute:
    def test_scaling(self):
        f = Polynomial.variable(1, 0)
        assert linear_substitute(f, [[2.0]]) == Polynomial(1, {(1,): 2.0})

    def test_rotation(self):
        f = Polynomial(2, {(2, 0): 1.0})
        rot = np.array([[0.0, 1.0], [-1.0, 0.0]])  # x1 -> x2, x2 -> -x1
        assert linear_substitute(f, rot).allclose(Polynomial(2, {(0, 2): 1.0}))

    def test_identity(self):
        f = Polynomial(2, {(1, 1): 1.0})
        assert linear_substitute(f, np.eye(2)) == f

    def test_norm_bound_random(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            d = rng.integers(1, 4)
            deg = rng.integers(1, 5)
            f = rand_poly(rng, d, deg)
            mat = rng.standard_normal((d, d))
            lhs = coeff_norm(linear_substitute(f, mat))
            rhs = np.linalg.norm(mat, 2) ** deg * coeff_norm(f)
            assert lhs <= rhs * (1 + 1e-10)


class TestProductNormBound:
    def test_random_instances(self):
        rng = np.random.default_rng(13)
        for _ in range(500):
            d = rng.integers(1, 5)
            a = rng.integers(0, 4)
            b = rng.integers(0, 4 if a < 3 else 3)
            f = rand_poly(rng, d, a)
            g = rand_poly(rng, d, b)
            assert coeff_norm(poly_mul(f, g)) <= coeff_norm(f) * coeff_norm(g) * (1 + 1e-10)


class TestSymTensorize:
    def test_dot_product_is_identity(self):
        cm = sym_tensorize(BiPolynomial.dot_product(2))
        assert np.allclose(cm.data, np.eye(2))
        assert sym_op_norm(BiPolynomial.dot_product(2)) == pytest.approx(1.0)

    def test_single_entry(self):
        p = BiPolynomial(1, {((1,), (1,)): 1.0})
        cm = sym_tensorize(p)
        assert cm.data.shape == (1, 1)
        assert cm.data[0, 0] == 1.0

    def test_rank_one_product(self):
        p = Polynomial(2, {(1, 0): 1.0, (0, 1): 1.0})
        q = Polynomial(2, {(1, 0): 1.0})
        bp = BiPolynomial.outer(p, q)
        cm = sym_tensorize(bp)
        assert np.linalg.matrix_rank(cm.data) == 1
        assert cm.op_norm() == pytest.approx(coeff_norm(p) * coeff_norm(q))
        assert cm.op_norm() == pytest.approx(math.sqrt(2))

    def test_zero(self):
        assert sym_op_norm(BiPolynomial.zero(2)) == 0.0

    def test_rejects_inhomogeneous(self):
        p = BiPolynomial(1, {((1,), (1,)): 1.0, ((2,), (1,)): 1.0})
        with pytest.raises(ValueError):
            sym_tensorize(p)

    def test_submultiplicative_random(self):
        rng = np.random.default_rng(14)
        for _ in range(500):
            d = rng.integers(1, 4)
            p = BiPolynomial.outer(rand_poly(rng, d, rng.integers(1, 3)),
                                   rand_poly(rng, d, rng.integers(1, 3)))
            q = BiPolynomial.outer(rand_poly(rng, d, rng.integers(1, 3)),
                                   rand_poly(rng, d, rng.integers(1, 3)))
            # generic bi-homogeneous inputs: mix two outer products
            p = p + BiPolynomial.outer(rand_poly(rng, d, p.bidegree()[0]),
                                       rand_poly(rng, d, p.bidegree()[1]))
            assert sym_op_norm(p * q) <= sym_op_norm(p) * sym_op_norm(q) * (1 + 1e-10)

    def test_compact_norm_equals_full_symmetrized_matrix(self):
        # exhaustive small cases: build the full d^m1 x d^m2 matrix
        rng = np.random.default_rng(15)
        for d in (1, 2, 3):
            for m1 in (1, 2):
                for m2 in (1, 2):
                    bp = BiPolynomial.outer(rand_poly(rng, d, m1), rand_poly(rng, d, m2)) \
                        + BiPolynomial.outer(rand_poly(rng, d, m1), rand_poly(rng, d, m2))
                    full = np.zeros((d**m1, d**m2))
                    for si, seq1 in enumerate(itertools.product(range(d), repeat=m1)):
                        i1 = [0] * d
                        for i in seq1:
                            i1[i] += 1
                        for sj, seq2 in enumerate(itertools.product(range(d), repeat=m2)):
                            i2 = [0] * d
                            for i in seq2:
                                i2[i] += 1
                            c = bp.terms.get((tuple(i1), tuple(i2)), 0.0)
                            if c:
                                full[si, sj] = c / (multinomial(tuple(i1)) * multinomial(tuple(i2)))
                    cm = sym_tensorize(bp)
                    assert cm.op_norm() == pytest.approx(np.linalg.norm(full, 2), rel=1e-10, abs=1e-12)
                    assert np.linalg.norm(cm.data) == pytest.approx(np.linalg.norm(full), rel=1e-10)


class TestBases:
    def test_graded_lex_order(self):
        assert monomial_basis(2, 2) == ((2, 0), (1, 1), (0, 2))
        assert monomial_basis(3, 1) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))

    def test_compact_vector_round_trip(self):
        rng = np.random.default_rng(16)
        f = rand_poly(rng, 3, 4)
        v = f.compact_vector()
        back = Polynomial.from_compact_vector(v, 3, 4)
        assert back.allclose(f, rtol=1e-14)
