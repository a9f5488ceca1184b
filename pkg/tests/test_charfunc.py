"""Inversion from generating-function space to polynomial-Gaussian densities."""

import math

import numpy as np
import pytest

from hermix.charfunc import GenCombination, inv_sqrt_psd, invert_combination, invert_poly_exponential
from hermix.hermite import (
    Gaussian,
    _exp_primary_terms,
    _poly_times_primary_series,
    gaussian_expectation,
    mpg_hermite_moments,
)
from hermix.polyalg import Polynomial, coeff_norm, linear_substitute, monomial_basis


def rand_homog(rng, dim, degree):
    return Polynomial(dim, {m: rng.standard_normal() for m in monomial_basis(dim, degree)})


class TestInvertPolyExponential:
    def test_constant(self):
        q, g = invert_poly_exponential(Polynomial.constant(2, 1.0), [0.3, -0.1], np.zeros((2, 2)))
        assert q == Polynomial.constant(2, 1.0)
        assert np.allclose(g.mean, [0.3, -0.1])
        assert np.allclose(g.cov, np.eye(2))

    def test_linear_1d(self):
        q, g = invert_poly_exponential(Polynomial.variable(1, 0), [0.0], [[0.0]])
        assert q.allclose(Polynomial.variable(1, 0))

    def test_quadratic_1d(self):
        p = Polynomial(1, {(2,): 1.0})
        q, g = invert_poly_exponential(p, [0.0], [[0.0]])
        assert q.allclose(Polynomial(1, {(2,): 1.0, (0,): -1.0}))
        e2 = gaussian_expectation(q * q, g)
        assert e2 == pytest.approx(2.0, rel=1e-12)
        assert e2 == pytest.approx(math.factorial(2) * coeff_norm(p) ** 2)

    def test_variance_identity_random(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            d = int(rng.integers(1, 4))
            m = int(rng.integers(1, 5))
            p = rand_homog(rng, d, m)
            mu = rng.uniform(-0.5, 0.5, d)
            a = rng.standard_normal((d, d)) * 0.2
            dev = (a + a.T) / 2
            q, g = invert_poly_exponential(p, mu, dev)
            lhs = gaussian_expectation(q * q, g)
            h = linear_substitute(p, inv_sqrt_psd(np.eye(d) + dev))
            rhs = math.factorial(m) * coeff_norm(h) ** 2
            assert lhs == pytest.approx(rhs, rel=1e-8)

    def test_l1_bound_monte_carlo(self):
        # integral of |q| against the Gaussian is at most sqrt(m!) |v(p)|
        rng = np.random.default_rng(22)
        for _ in range(20):
            d = int(rng.integers(1, 4))
            m = int(rng.integers(1, 5))
            p = rand_homog(rng, d, m)
            q, g = invert_poly_exponential(p, np.zeros(d), np.zeros((d, d)))
            n = 40_000
            t = g.sample(n, rng)
            vals = np.abs(q.eval_many(t))
            est = vals.mean()
            se = vals.std(ddof=1) / math.sqrt(n)
            assert est <= math.sqrt(math.factorial(m)) * coeff_norm(p) + 3 * se

    def test_singular_covariance_rejected(self):
        with pytest.raises(ValueError):
            invert_poly_exponential(Polynomial.variable(1, 0), [0.0], [[-1.0]])


class TestInvertCombination:
    def test_constant_weights_give_mixture(self):
        comb = GenCombination(
            polys=(Polynomial.constant(2, 0.3), Polynomial.constant(2, 0.7)),
            means=(np.array([0.0, 0.0]), np.array([1.0, -1.0])),
            sigma_devs=(np.zeros((2, 2)), np.eye(2) * 0.2),
        )
        model = invert_combination(comb)
        assert model.weight_polys[0].allclose(Polynomial.constant(2, 0.3))
        assert model.weight_polys[1].allclose(Polynomial.constant(2, 0.7))

    def test_single_linear_component(self):
        comb = GenCombination(
            polys=(Polynomial.variable(1, 0),),
            means=(np.array([0.0]),),
            sigma_devs=(np.zeros((1, 1)),),
        )
        model = invert_combination(comb)
        assert model.weight_polys[0].allclose(Polynomial.variable(1, 0))
        # density is t times the standard normal pdf
        val = model.pdf(np.array([[0.7]]))[0]
        assert val == pytest.approx(0.7 * math.exp(-0.245) / math.sqrt(2 * math.pi))

    def test_round_trip_reproduces_series(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            d = 2
            polys = []
            means = []
            devs = []
            for _j in range(2):
                p = Polynomial(
                    d,
                    {
                        (0, 0): rng.uniform(0.2, 0.8),
                        (1, 0): rng.standard_normal() * 0.3,
                        (0, 1): rng.standard_normal() * 0.3,
                        (2, 0): rng.standard_normal() * 0.2,
                        (1, 1): rng.standard_normal() * 0.2,
                    },
                )
                a = rng.standard_normal((d, d)) * 0.15
                polys.append(p)
                means.append(rng.uniform(-0.4, 0.4, d))
                devs.append((a + a.T) / 2)
            comb = GenCombination(tuple(polys), tuple(means), tuple(devs))
            model = invert_combination(comb)
            got = mpg_hermite_moments(model, 6)
            want = [Polynomial.zero(d) for _ in range(7)]
            for p, mu, dev in zip(polys, means, devs):
                ypoly = [p.homogeneous_part(t) for t in range(p.degree() + 1)]
                prim = _exp_primary_terms(
                    Polynomial.from_linear(mu), Polynomial.from_quadratic(dev), 6
                )
                ev = _poly_times_primary_series(ypoly, prim)
                for i in range(7):
                    want[i] = want[i] + ev[i]
            for a, b in zip(got, want):
                assert coeff_norm(a - b) <= 1e-9 * max(coeff_norm(b), 1.0) if not (a - b).is_zero() else True
