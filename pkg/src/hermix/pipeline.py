"""Outer learning algorithm: rough components, clustering, per-cluster
regular-form fitting, candidate enumeration, and hypothesis selection.

Rough component estimation is pluggable: an oracle (perturbs the truth by a
controlled parameter distance, for benchmarks) and a trimmed-EM practical
variant are provided.  Candidates are produced for every rough estimate,
every partition of the components into clusters, and every mixing-weight
grid point; a pairwise density-comparison tournament picks the winner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .densityfit import fit_generating_combination, gaussian_poly_integral, to_distribution
from .hermite import Gaussian, GaussianMixture, MPGModel
from .momentest import default_moment_degree, estimate_hermite_moments
from .polyalg import Polynomial, affine_substitute

__all__ = [
    "PipelineConfig",
    "RoughEstimate",
    "ClusterAssignment",
    "CandidateDensity",
    "oracle_rough_estimates",
    "em_rough_estimates",
    "component_partition",
    "max_likelihood_cluster",
    "regularize_and_fit",
    "enumerate_candidates",
    "candidate_count",
    "scheffe_select",
    "tv_parameter_proxy",
    "set_partitions",
]


@dataclass
class PipelineConfig:
    """Knobs for the fitting pipeline; defaults are desk-scale calibrated."""

    theta: float = 0.1  # mixing-weight floor
    degree_cap: int = 2  # correction polynomial degree
    moment_degree: int | None = None  # override momentest m (per cluster size)
    fit_degree: int | None = None  # moments matched by the density fit
    sigma_bound: float = 10.0
    rounds: int = 6
    weight_grid_step: float | None = None  # default max(eps, 0.05)
    partition_threshold: float | None = None  # default 6 sqrt(chi log(1/eps))
    chi: float = 1.5
    scheffe_budget: int = 4000

    def grid_step(self, eps: float) -> float:
        if self.weight_grid_step is not None:
            return self.weight_grid_step
        return max(eps, 0.05)

    def tau(self, eps: float) -> float:
        if self.partition_threshold is not None:
            return self.partition_threshold
        return 6.0 * math.sqrt(self.chi * math.log(1.0 / max(eps, 1e-6)))

    def m_for(self, k: int) -> int:
        return self.moment_degree if self.moment_degree is not None else default_moment_degree(k)

    def m_fit_for(self, k: int) -> int:
        if self.fit_degree is not None:
            return self.fit_degree
        kappa = (1 << k) - 1
        return min(self.m_for(k), max(2 * kappa, self.degree_cap + 4))


@dataclass
class RoughEstimate:
    candidates: list[GaussianMixture]

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("need at least one candidate mixture")


@dataclass
class ClusterAssignment:
    labels: np.ndarray  # per-sample part index
    partition: list[list[int]]  # parts of the component index set


@dataclass
class CandidateDensity:
    model: MPGModel
    provenance: dict


def tv_parameter_proxy(g1: Gaussian, g2: Gaussian) -> float:
    """Mahalanobis mean distance plus relative covariance Frobenius distance.

    Upper-bounds total variation up to a universal constant; used to size
    perturbations and partition components.
    """
    diff = g2.mean - g1.mean
    w = np.linalg.solve(g1.chol, diff)
    mean_term = float(np.linalg.norm(w))
    a = np.linalg.solve(g1.chol, np.linalg.solve(g1.chol, g2.cov).T)
    cov_term = float(np.linalg.norm(a - np.eye(g1.dim), "fro"))
    return mean_term + cov_term


def _sym_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((mat + mat.T) / 2.0)
    if np.any(vals <= 0):
        raise ValueError("matrix not positive definite")
    return vecs @ np.diag(np.sqrt(vals)) @ vecs.T


def oracle_rough_estimates(
    truth: GaussianMixture, accuracy_exponent: float, eps: float, rng: np.random.Generator
) -> RoughEstimate:
    """Benchmark stand-in for rough parameter estimation.

    Returns one candidate whose components are perturbed from the truth by a
    parameter-distance proxy of about eps**accuracy_exponent (exactly that
    value scaled by a uniform draw in [0.5, 1]).
    """
    tau = eps**accuracy_exponent if accuracy_exponent < 60 else 0.0
    d = truth.dim
    comps = []
    for g in truth.components:
        t = tau * rng.uniform(0.5, 1.0)
        s = rng.uniform(0.3, 0.7)
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        half = _sym_sqrt(g.cov)
        mean = g.mean + half @ (s * t * u)
        e = rng.standard_normal((d, d))
        e = (e + e.T) / 2.0
        fro = np.linalg.norm(e, "fro")
        if fro > 0:
            e *= (1.0 - s) * t / fro
        cov = half @ (np.eye(d) + e) @ half
        comps.append(Gaussian(mean, cov))
    w = np.asarray(truth.weights, dtype=float).copy()
    w = np.clip(w + rng.uniform(-tau, tau, size=w.shape) / max(len(w), 1), 0.02, None)
    w /= w.sum()
    return RoughEstimate([GaussianMixture(comps, w)])


def em_rough_estimates(
    samples,
    k: int,
    restarts: int = 5,
    rng: np.random.Generator | None = None,
    eps: float = 0.0,
    iters: int = 50,
) -> RoughEstimate:
    """Trimmed EM: drops the eps-fraction lowest-likelihood points each step."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n, d = samples.shape
    if rng is None:
        rng = np.random.default_rng(0)
    out = []
    for _ in range(restarts):
        for _attempt in range(5):
            idx = rng.choice(n, size=k, replace=False)
            means = samples[idx].copy()
            covs = [np.cov(samples.T) + 1e-3 * np.eye(d) for _ in range(k)]
            weights = np.full(k, 1.0 / k)
            ok = True
            for _it in range(iters):
                comps = [Gaussian(means[j], covs[j]) for j in range(k)]
                lp = np.stack([g.logpdf(samples) for g in comps], axis=1) + np.log(weights)
                tot = np.logaddexp.reduce(lp, axis=1)
                keep = np.ones(n, dtype=bool)
                if eps > 0:
                    cut = math.ceil(eps * n)
                    keep[np.argsort(tot, kind="stable")[:cut]] = False
                resp = np.exp(lp[keep] - tot[keep, None])
                nk = resp.sum(axis=0)
                if np.any(nk < d + 1):
                    ok = False
                    break
                weights = nk / nk.sum()
                means = (resp.T @ samples[keep]) / nk[:, None]
                new_covs = []
                for j in range(k):
                    c = samples[keep] - means[j]
                    cov = (resp[:, j, None] * c).T @ c / nk[j] + 1e-6 * np.eye(d)
                    if np.linalg.eigvalsh(cov).min() < 1e-8:
                        ok = False
                        break
                    new_covs.append(cov)
                if not ok:
                    break
                covs = new_covs
            if ok:
                out.append(
                    GaussianMixture([Gaussian(means[j], covs[j]) for j in range(k)], weights)
                )
                break
    if not out:
        raise RuntimeError("all EM restarts degenerated")
    return RoughEstimate(out)


def component_partition(components: list[Gaussian], tau: float) -> list[list[int]]:
    """Connected components of the closeness graph with edge threshold tau.

    The edge metric is mean distance plus spectral covariance distance.
    """
    k = len(components)
    adj = [[] for _ in range(k)]
    for i, j in combinations(range(k), 2):
        dist = float(
            np.linalg.norm(components[i].mean - components[j].mean)
            + np.linalg.norm(components[i].cov - components[j].cov, 2)
        )
        if dist <= tau:
            adj[i].append(j)
            adj[j].append(i)
    seen = [False] * k
    parts = []
    for start in range(k):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        part = []
        while stack:
            v = stack.pop()
            part.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        parts.append(sorted(part))
    return parts


def max_likelihood_cluster(
    samples, components: list[Gaussian], partition: list[list[int]]
) -> ClusterAssignment:
    """Assign each sample to its maximum-likelihood component's part.

    Ties go to the lowest component index.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    lp = np.stack([g.logpdf(samples) for g in components], axis=1)
    best = np.argmax(lp, axis=1)  # argmax returns the first (lowest) maximizer
    part_of = {}
    for pi, part in enumerate(partition):
        for ci in part:
            part_of[ci] = pi
    labels = np.array([part_of[c] for c in best])
    return ClusterAssignment(labels=labels, partition=[list(p) for p in partition])


def _transform_gaussian(g: Gaussian, lin: np.ndarray, shift: np.ndarray) -> Gaussian:
    """Image of N(mean, cov) under x -> lin (x - shift)."""
    return Gaussian(lin @ (g.mean - shift), lin @ g.cov @ lin.T)


def regularize_and_fit(
    samples,
    rough_components: list[Gaussian],
    eps: float,
    cfg: PipelineConfig,
) -> MPGModel:
    """Whiten by the first rough component, fit, and map back.

    The anchor transform x -> S^{-1/2}(x - mu) puts the cluster in regular
    form (anchor near standard normal); the fitted density f is returned as
    f(S^{-1/2}(x - mu)) det(S)^{-1/2}, which stays in the model class.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 0:
        raise ValueError("empty cluster")
    anchor = rough_components[0]
    vals, vecs = np.linalg.eigh(anchor.cov)
    inv_half = vecs @ np.diag(vals**-0.5) @ vecs.T
    half = vecs @ np.diag(vals**0.5) @ vecs.T

    z = (samples - anchor.mean) @ inv_half.T
    local = [_transform_gaussian(g, inv_half, anchor.mean) for g in rough_components]
    k = len(local)
    est = estimate_hermite_moments(
        z,
        k=k,
        m=cfg.m_for(k),
        eps=eps,
        theta=cfg.theta,
        sigma_bound=cfg.sigma_bound,
        rounds=cfg.rounds,
    )
    m_fit = cfg.m_fit_for(k)
    # weight each matched degree by the inverse feature noise scale so the
    # fit does not chase statistically meaningless high-degree mismatches
    weights = [1.0]
    for j in range(1, m_fit + 1):
        cov = est.covariances[j]
        scale = math.sqrt(max(float(np.mean(np.diag(cov))), 1e-12)) if cov is not None else 1.0
        weights.append(1.0 / scale)
    weights[0] = max(weights[1:]) if len(weights) > 1 else 1.0
    fit = fit_generating_combination(
        est.estimates,
        local,
        degree_cap=cfg.degree_cap,
        theta=cfg.theta,
        m_fit=m_fit,
        degree_weights=weights,
    )
    model = to_distribution(fit)

    # back-transform: Gaussians map exactly; weight polynomials compose with
    # the forward affine map
    out_polys = []
    out_comps = []
    for q, g in zip(model.weight_polys, model.components):
        out_comps.append(Gaussian(anchor.mean + half @ g.mean, half @ g.cov @ half))
        out_polys.append(affine_substitute(q, inv_half, -inv_half @ anchor.mean))
    return MPGModel(out_polys, out_comps, is_distribution=True)


def set_partitions(items: list[int]):
    """All partitions of a list into nonempty unordered parts."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in set_partitions(rest):
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1 :]
        yield [[first]] + sub


def _simplex_grid(l: int, step: float):
    """Grid points on the l-simplex with the given step."""
    if l == 1:
        yield (1.0,)
        return
    steps = int(round(1.0 / step))
    def rec(remaining, parts_left):
        if parts_left == 1:
            yield (remaining,)
            return
        for i in range(remaining + 1):
            for tail in rec(remaining - i, parts_left - 1):
                yield (i,) + tail
    for combo in rec(steps, l):
        yield tuple(c / steps for c in combo)


def candidate_count(n_rough: int, k: int, step: float) -> int:
    """Number of candidates enumerate_candidates will produce, assuming no
    partition is skipped for emptiness."""
    total = 0
    for partition in set_partitions(list(range(k))):
        total += sum(1 for _ in _simplex_grid(len(partition), step))
    return n_rough * total


def _combine(models: list[MPGModel], weights) -> MPGModel:
    polys = []
    comps = []
    for w, m in zip(weights, models):
        if w == 0.0:
            continue
        for q, g in zip(m.weight_polys, m.components):
            polys.append(q.scale(float(w)))
            comps.append(g)
    model = MPGModel(polys, comps, is_distribution=True)
    return model


def enumerate_candidates(
    samples,
    rough: RoughEstimate,
    eps: float,
    cfg: PipelineConfig,
) -> list[CandidateDensity]:
    """Fit every (rough estimate, partition, weight grid point) combination.

    Clusters samples by maximum likelihood, fits each submixture in regular
    form, and combines the cluster densities with every grid weighting.
    Partitions that produce an empty cluster are skipped.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    step = cfg.grid_step(eps)
    out = []
    for ri, mix in enumerate(rough.candidates):
        k = mix.k
        for pi, partition in enumerate(set_partitions(list(range(k)))):
            assign = max_likelihood_cluster(samples, mix.components, partition)
            counts = np.bincount(assign.labels, minlength=len(partition))
            if np.any(counts == 0):
                continue
            fits = []
            failed = False
            try:
                for li, part in enumerate(partition):
                    sub = samples[assign.labels == li]
                    comps = [mix.components[c] for c in part]
                    fits.append(regularize_and_fit(sub, comps, eps, cfg))
            except (ValueError, np.linalg.LinAlgError):
                failed = True
            if failed:
                continue
            for wi, weights in enumerate(_simplex_grid(len(partition), step)):
                if all(w == 0.0 for w in weights):
                    continue
                model = _combine(fits, weights)
                out.append(
                    CandidateDensity(
                        model=model,
                        provenance={
                            "rough_index": ri,
                            "partition": [list(p) for p in partition],
                            "weights": list(weights),
                        },
                    )
                )
    return out


def _proposal_mixture(model: MPGModel) -> GaussianMixture:
    """Gaussian part of an MPG distribution, weighted by component mass."""
    masses = np.array(
        [
            max(gaussian_poly_integral(q, g), 0.0)
            for q, g in zip(model.weight_polys, model.components)
        ]
    )
    if masses.sum() <= 0:
        masses = np.ones(len(model.components))
    masses = np.maximum(masses, 1e-12)
    masses /= masses.sum()
    return GaussianMixture(list(model.components), masses)


def scheffe_select(
    candidates: list[CandidateDensity],
    samples,
    mc_budget: int,
    rng: np.random.Generator,
) -> tuple[int, dict]:
    """Pairwise density-comparison tournament; returns (index, diagnostics).

    For each pair (i, j) and the set A = {x : F_i(x) > F_j(x)}, each
    candidate's mass of A is importance-sampled from its own Gaussian
    components (per-point weight is the weight polynomial, stratified per
    component, clipped at the 99.99th percentile with clipped mass reported)
    and compared against the empirical mass of A; the candidate with the
    smaller discrepancy wins the pair.  Most wins is selected, ties to
    lowest index.
    """
    if not candidates:
        raise ValueError("no candidates")
    if mc_budget <= 0:
        raise ValueError("mc_budget must be positive")
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    nc = len(candidates)
    if nc == 1:
        return 0, {"wins": [0], "clip_mass": 0.0}

    dens_data = [c.model.pdf(samples) for c in candidates]

    # per candidate: draw points from each Gaussian component, carry the
    # weight polynomial's value so sum(contrib * 1_A) estimates F(A)
    pts_all = []
    contrib_all = []
    clip_mass = 0.0
    for c in candidates:
        kc = c.model.k
        per = max(1, mc_budget // kc)
        pts = []
        contrib = []
        for q, g in zip(c.model.weight_polys, c.model.components):
            x = g.sample(per, rng)
            w = q.eval_many(x)
            hi = np.quantile(w, 0.9999)
            clip_mass += float(np.maximum(w - hi, 0.0).mean())
            pts.append(x)
            contrib.append(np.minimum(w, hi) / per)
        pts_all.append(np.concatenate(pts, axis=0))
        contrib_all.append(np.concatenate(contrib))
    clip_mass /= nc

    # density of every candidate at every candidate's sample points
    dens_at = [[c.model.pdf(pts) for c in candidates] for pts in pts_all]

    wins = [0] * nc
    for i in range(nc):
        for j in range(i + 1, nc):
            emp = float(np.mean(dens_data[i] > dens_data[j]))
            est_i = float(np.sum(contrib_all[i] * (dens_at[i][i] > dens_at[i][j])))
            est_j = float(np.sum(contrib_all[j] * (dens_at[j][i] > dens_at[j][j])))
            if abs(est_i - emp) <= abs(est_j - emp):
                wins[i] += 1
            else:
                wins[j] += 1
    best = int(np.argmax(wins))  # argmax takes the lowest index on ties
    return best, {"wins": wins, "clip_mass": clip_mass}
