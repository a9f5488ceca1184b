"""Robust density estimation for Gaussian mixtures from corrupted samples.

Estimates the density of a k-component Gaussian mixture from samples where an
adversary replaced an eps-fraction, to near-optimal total-variation accuracy.
The route: robustly estimate Hermite moment polynomials (iterating a
recurrence-based covariance reconstruction with an outlier filter), then fit a
mixture of polynomial Gaussians matching them, enumerate candidate densities,
and select by pairwise hypothesis testing.
"""

__version__ = "0.1.0"
