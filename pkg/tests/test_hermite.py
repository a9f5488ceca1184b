"""Hermite polynomials, moment polynomials, and model serialization."""

import math

import numpy as np
import pytest

from hermix.hermite import (
    Gaussian,
    GaussianMixture,
    MPGModel,
    empirical_hermite_mean,
    gaussian_expectation,
    gaussian_hermite_moments,
    gaussian_smooth_poly,
    hermite_feature,
    mixture_hermite_moments,
    model_from_json,
    model_to_json,
    mpg_hermite_moments,
    mpg_pdf,
    univariate_hermite,
)
from hermix.polyalg import Polynomial, coeff_norm, monomial_basis, poly_mul


class TestUnivariateHermite:
    def test_first_values(self):
        assert univariate_hermite(0) == Polynomial.constant(1, 1.0)
        assert univariate_hermite(2) == Polynomial(1, {(2,): 1.0, (0,): -1.0})
        assert univariate_hermite(3) == Polynomial(1, {(3,): 1.0, (1,): -3.0})

    def test_recurrence_holds_to_20(self):
        x = Polynomial.variable(1, 0)
        for m in range(2, 21):
            lhs = univariate_hermite(m)
            rhs = poly_mul(x, univariate_hermite(m - 1)) - univariate_hermite(m - 2).scale(m - 1)
            assert lhs == rhs

    def test_orthogonality_by_quadrature(self):
        # probabilists' Gauss-Hermite nodes; weights sum to sqrt(2 pi)
        nodes, weights = np.polynomial.hermite_e.hermegauss(40)
        weights = weights / math.sqrt(2 * math.pi)
        for a in range(9):
            pa = univariate_hermite(a)
            va = np.array([pa([x]) for x in nodes])
            for b in range(9):
                pb = univariate_hermite(b)
                vb = np.array([pb([x]) for x in nodes])
                integral = float(np.sum(weights * va * vb))
                expected = math.factorial(a) if a == b else 0.0
                assert integral == pytest.approx(expected, abs=1e-8 * max(1, expected))


class TestHermiteFeature:
    def test_1d_quadratic(self):
        assert hermite_feature([3.0], 2) == Polynomial(1, {(2,): 8.0})

    def test_linear(self):
        f = hermite_feature([2.0, -1.0], 1)
        assert f == Polynomial(2, {(1, 0): 2.0, (0, 1): -1.0})

    def test_degree_zero(self):
        assert hermite_feature([5.0, 1.0], 0) == Polynomial.constant(2, 1.0)

    def test_homogeneous(self):
        f = hermite_feature([0.3, 0.7, -0.2], 4)
        assert f.is_homogeneous() and f.degree() == 4


class TestGaussianMoments:
    def test_standard_normal_vanishes(self):
        g = Gaussian([0.0, 0.0], np.eye(2))
        hs = gaussian_hermite_moments(g, 5)
        assert all(h.is_zero() for h in hs[1:])

    def test_identity_cov_linear(self):
        g = Gaussian([1.5, -0.5], np.eye(2))
        hs = gaussian_hermite_moments(g, 2)
        assert hs[1] == Polynomial(2, {(1, 0): 1.5, (0, 1): -0.5})

    def test_degree_two_closed_form(self):
        mu = np.array([0.4, -0.7])
        dev = np.array([[0.2, 0.1], [0.1, -0.1]])
        g = Gaussian(mu, np.eye(2) + dev)
        h2 = gaussian_hermite_moments(g, 2)[2]
        expected = poly_mul(Polynomial.from_linear(mu), Polynomial.from_linear(mu)) + \
            Polynomial.from_quadratic(dev)
        assert h2.allclose(expected, rtol=1e-14)

    def test_generating_identity_monte_carlo(self):
        # empirical means of H_m(X, z) match the closed form within 4 SE
        rng = np.random.default_rng(77)
        for d in (1, 2, 3):
            mu = rng.uniform(-0.5, 0.5, d)
            a = rng.standard_normal((d, d)) * 0.15
            dev = (a + a.T) / 2
            g = Gaussian(mu, np.eye(d) + dev)
            n = 100_000
            z = g.sample(n, rng)
            closed = gaussian_hermite_moments(g, 6)
            from hermix.kernels import hermite_feature_coeffs

            coeffs = hermite_feature_coeffs(z, 6)
            for m in range(1, 7):
                emp = coeffs[m].mean(axis=0)
                se = coeffs[m].std(axis=0, ddof=1) / math.sqrt(n)
                basis = monomial_basis(d, m)
                for i, mono in enumerate(basis):
                    truth = closed[m].coefficient(mono)
                    assert abs(emp[i] - truth) <= 4 * se[i] + 1e-9


class TestMixtureMoments:
    def test_single_component(self):
        g = Gaussian([0.3], [[1.2]])
        mix = GaussianMixture([g], [1.0])
        a = mixture_hermite_moments(mix, 4)
        b = gaussian_hermite_moments(g, 4)
        assert all(x.allclose(y, rtol=1e-14) for x, y in zip(a, b))

    def test_symmetric_pair(self):
        mu = np.array([0.8, 0.2])
        mix = GaussianMixture(
            [Gaussian(-mu, np.eye(2)), Gaussian(mu, np.eye(2))], [0.5, 0.5]
        )
        hs = mixture_hermite_moments(mix, 2)
        assert hs[1].is_zero()
        musq = poly_mul(Polynomial.from_linear(mu), Polynomial.from_linear(mu))
        assert hs[2].allclose(musq, rtol=1e-14)


class TestSmoothPoly:
    def test_linear_unchanged(self):
        q = Polynomial.variable(2, 0)
        assert gaussian_smooth_poly(q, np.zeros((2, 2))) == q

    def test_quadratic_1d(self):
        q = Polynomial(1, {(2,): 1.0})
        s2 = 1.7  # total covariance
        p = gaussian_smooth_poly(q, [[s2 - 1.0]])
        assert p.allclose(Polynomial(1, {(2,): 1.0, (0,): s2}), rtol=1e-14)

    def test_constant(self):
        q = Polynomial.constant(3, 1.0)
        assert gaussian_smooth_poly(q, np.eye(3) * 0.3) == q


class TestMPGMoments:
    def test_constant_weights_match_mixture(self):
        mix = GaussianMixture(
            [Gaussian([0.2, 0.0], np.eye(2) * 1.1), Gaussian([-0.4, 0.6], np.eye(2) * 0.9)],
            [0.3, 0.7],
        )
        model = MPGModel.from_mixture(mix)
        a = mpg_hermite_moments(model, 5)
        b = mixture_hermite_moments(mix, 5)
        for x, y in zip(a, b):
            assert x.allclose(y, rtol=1e-12, atol=1e-13)

    def test_normalized_poly_gaussian_mass(self):
        # (1 + x^2) N(0,1) has total mass 2; normalized h_0 = 1
        q = Polynomial(1, {(0,): 0.5, (2,): 0.5})
        model = MPGModel([q], [Gaussian([0.0], [[1.0]])])
        h = mpg_hermite_moments(model, 2)
        assert h[0].allclose(Polynomial.constant(1, 1.0), rtol=1e-14)

    def test_even_weight_kills_odd_moment(self):
        q = Polynomial(1, {(2,): 1.0})
        model = MPGModel([q], [Gaussian([0.0], [[1.0]])])
        h = mpg_hermite_moments(model, 3)
        assert h[1].is_zero()
        assert h[3].is_zero()

    def test_against_monte_carlo(self):
        # random degree-2 weights: moments match sample-based integrals
        rng = np.random.default_rng(5)
        d = 2
        g = Gaussian(rng.uniform(-0.3, 0.3, d), np.eye(d))
        q = Polynomial(d, {(0, 0): 1.0, (1, 0): 0.3, (0, 2): 0.4})
        model = MPGModel([q], [g])
        mass = gaussian_expectation(q, g)
        h = mpg_hermite_moments(model, 4)
        # importance-sample z ~ g, weight q(z); E_f[H_m] = E_g[q(z) H_m] (unnormalized)
        n = 200_000
        z = g.sample(n, rng)
        w = q.eval_many(z)
        from hermix.kernels import hermite_feature_coeffs

        coeffs = hermite_feature_coeffs(z, 4)
        for m in range(0, 5):
            emp = (coeffs[m] * w[:, None]).mean(axis=0)
            se = (coeffs[m] * w[:, None]).std(axis=0, ddof=1) / math.sqrt(n)
            for i, mono in enumerate(monomial_basis(d, m)):
                assert abs(emp[i] - h[m].coefficient(mono)) <= 4 * se[i] + 1e-9
        mu = g.mean
        assert mass == pytest.approx(1.0 + 0.3 * mu[0] + 0.4 * (mu[1] ** 2 + 1.0), rel=1e-12)


class TestEmpiricalMean:
    def test_zero_samples(self):
        z = np.zeros((10, 2))
        assert empirical_hermite_mean(z, 1).is_zero()

    def test_single_point(self):
        z = np.array([[1.0, -2.0]])
        assert empirical_hermite_mean(z, 1) == Polynomial(2, {(1, 0): 1.0, (0, 1): -2.0})

    def test_clt_floor_standard_normal(self):
        rng = np.random.default_rng(8)
        z = rng.standard_normal((1_000_000, 2))
        h2 = empirical_hermite_mean(z, 2)
        for mono in monomial_basis(2, 2):
            assert abs(h2.coefficient(mono)) < 5e-3

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            empirical_hermite_mean(np.zeros((0, 2)), 1)


class TestMpgPdf:
    def test_standard_normal_at_origin(self):
        model = MPGModel([Polynomial.constant(1, 1.0)], [Gaussian([0.0], [[1.0]])])
        assert mpg_pdf(model, [[0.0]])[0] == pytest.approx(1 / math.sqrt(2 * math.pi))

    def test_poly_weight(self):
        model = MPGModel([Polynomial(1, {(2,): 1.0})], [Gaussian([0.0], [[1.0]])])
        val = mpg_pdf(model, [[1.0]])[0]
        assert val == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi))

    def test_distribution_nonnegative(self):
        mix = GaussianMixture(
            [Gaussian([0.0, 0.0], np.eye(2)), Gaussian([1.0, -1.0], np.eye(2) * 1.3)],
            [0.6, 0.4],
        )
        model = MPGModel.from_mixture(mix)
        rng = np.random.default_rng(2)
        pts = rng.standard_normal((100_000, 2)) * 4
        assert np.all(mpg_pdf(model, pts) >= 0)


class TestSerialization:
    def test_mixture_round_trip(self):
        mix = GaussianMixture(
            [Gaussian([0.1, 0.2], np.eye(2) * 1.5), Gaussian([-1.0, 0.0], np.eye(2))],
            [0.25, 0.75],
        )
        back = model_from_json(model_to_json(mix))
        assert isinstance(back, GaussianMixture)
        assert np.allclose(back.weights, mix.weights)
        for a, b in zip(back.components, mix.components):
            assert np.allclose(a.mean, b.mean)
            assert np.allclose(a.cov, b.cov)

    def test_mpg_round_trip(self):
        q = Polynomial(2, {(0, 0): 0.5, (2, 0): 0.1, (1, 1): -0.2})
        model = MPGModel([q], [Gaussian([0.0, 1.0], np.eye(2))], is_distribution=False)
        back = model_from_json(model_to_json(model))
        assert isinstance(back, MPGModel)
        assert back.weight_polys[0] == q
        assert back.is_distribution is False

    def test_monomial_key_format(self):
        q = Polynomial(3, {(2, 0, 1): 1.25})
        obj = model_to_json(MPGModel([q], [Gaussian([0.0] * 3, np.eye(3))]))
        assert obj["components"][0]["weight_poly"] == {"2,0,1": 1.25}
