"""Simulation harness: contamination adversaries, L1 distance estimation,
and reproducible end-to-end experiments.

Adversaries here are concrete instantiations of the replace-up-to-eps-n
threat model (the model itself allows any adaptive replacement; these are
representative heuristics).  Experiment reports are reproducible: the same
(config, seed) yields byte-identical canonical JSON; wall-clock timings are
stored in a separate section excluded from the canonical form.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .hermite import Gaussian, GaussianMixture, MPGModel, model_from_json, model_to_json
from .pipeline import (
    CandidateDensity,
    PipelineConfig,
    RoughEstimate,
    _proposal_mixture,
    em_rough_estimates,
    enumerate_candidates,
    oracle_rough_estimates,
    scheffe_select,
)

__all__ = [
    "Adversary",
    "ExperimentConfig",
    "ExperimentReport",
    "sample_and_corrupt",
    "estimate_l1",
    "random_regular_mixture",
    "run_experiment",
]


@dataclass
class Adversary:
    """Replacement adversary; ``kind`` selects the corruption pattern.

    point-mass: all corrupted points equal ``location``.
    shifted-cluster: corrupted points drawn Gaussian around data mean+offset.
    subtractive-trim: removes the most extreme points along ``direction`` and
        pads with copies of surviving points (its own index choice).
    random-heavy-tail: corrupted points get inverse-polynomial radii.
    """

    kind: str = "point-mass"
    location: list | None = None
    offset: list | None = None
    spread: float = 0.3
    direction: list | None = None
    scale: float = 10.0

    def apply(self, clean: np.ndarray, idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        out = clean.copy()
        n, d = clean.shape
        m = idx.shape[0]
        if m == 0:
            return out
        if self.kind == "point-mass":
            loc = np.asarray(
                self.location if self.location is not None else [3.0] * d, dtype=float
            )
            out[idx] = loc
        elif self.kind == "shifted-cluster":
            off = np.asarray(
                self.offset if self.offset is not None else [4.0] + [0.0] * (d - 1),
                dtype=float,
            )
            center = clean.mean(axis=0) + off
            out[idx] = center + self.spread * rng.standard_normal((m, d))
        elif self.kind == "subtractive-trim":
            v = np.asarray(
                self.direction if self.direction is not None else [1.0] + [0.0] * (d - 1),
                dtype=float,
            )
            v = v / np.linalg.norm(v)
            proj = clean @ v
            extreme = np.argsort(proj, kind="stable")[n - m :]
            survivors = np.setdiff1d(np.arange(n), extreme)
            out[extreme] = clean[rng.choice(survivors, size=m, replace=True)]
        elif self.kind == "random-heavy-tail":
            g = rng.standard_normal((m, d))
            g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-12)
            r = self.scale * rng.uniform(0.0, 1.0, size=(m, 1)) ** (-0.67)
            out[idx] = g * r
        else:
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        return out


def sample_and_corrupt(
    mix: GaussianMixture,
    n: int,
    eps: float,
    adv: Adversary,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw n iid points and let the adversary replace ceil(eps n) of them.

    The adversary sees the clean sample before acting; the corrupted index
    set is chosen uniformly except for subtractive-trim, which targets the
    extreme tail itself.
    """
    if not 0 <= eps < 1:
        raise ValueError("eps must be in [0, 1)")
    clean = mix.sample(n, rng)
    m = math.ceil(eps * n) if eps > 0 else 0
    idx = rng.choice(n, size=m, replace=False) if m else np.array([], dtype=int)
    out = adv.apply(clean, idx, rng)
    changed = int(np.sum(np.any(out != clean, axis=1)))
    assert changed <= m, "adversary exceeded its replacement budget"
    return out


def _as_mpg(model) -> MPGModel:
    if isinstance(model, GaussianMixture):
        return MPGModel.from_mixture(model)
    return model


def estimate_l1(f, g, mc_budget: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo integral of |f - g| with a shared Gaussian-mixture proposal.

    The proposal is the equal mixture of both models' Gaussian parts, which
    dominates (|f| + |g|) / 2 up to polynomial factors.
    """
    if mc_budget <= 0:
        raise ValueError("mc_budget must be positive")
    fm, gm = _as_mpg(f), _as_mpg(g)
    pf, pg = _proposal_mixture(fm), _proposal_mixture(gm)
    comps = list(pf.components) + list(pg.components)
    weights = np.concatenate([0.5 * pf.weights, 0.5 * pg.weights])
    prop = GaussianMixture(comps, weights / weights.sum())
    pts = prop.sample(mc_budget, rng)
    vals = np.abs(fm.pdf(pts) - gm.pdf(pts)) / np.maximum(prop.pdf(pts), 1e-300)
    est = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(mc_budget))
    return est, stderr


def random_regular_mixture(
    k: int,
    d: int,
    alpha: float,
    gamma: float,
    theta: float,
    rng: np.random.Generator,
) -> GaussianMixture:
    """Random mixture in regular form: component 1 within gamma of standard
    normal, the rest within alpha; all weights at least theta."""
    comps = []
    for j in range(k):
        bound = gamma if j == 0 else alpha
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        mean = rng.uniform(0.2, 0.6) * bound * u
        e = rng.standard_normal((d, d))
        e = (e + e.T) / 2.0
        e *= rng.uniform(0.2, 0.5) * bound / max(np.linalg.norm(e, 2), 1e-12)
        comps.append(Gaussian(mean, np.eye(d) + e))
    w = theta + rng.dirichlet(np.ones(k)) * (1.0 - k * theta)
    return GaussianMixture(comps, w / w.sum())


@dataclass
class ExperimentConfig:
    d: int = 2
    k: int = 2
    eps: float = 0.05
    n: int = 100_000
    seed: int = 0
    trials: int = 5
    mixture: dict | None = None  # explicit model JSON; otherwise generated
    alpha: float = 0.6
    gamma: float = 0.1
    theta: float = 0.2
    rough: dict = field(default_factory=lambda: {"kind": "oracle", "exponent": 0.25})
    adversary: dict = field(default_factory=lambda: {"kind": "point-mass"})
    pipeline: dict = field(default_factory=dict)
    l1_budget: int = 40_000
    scheffe_budget: int = 4000
    threads: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 <= self.eps < 1 / 6:
            raise ValueError("eps must be in [0, 1/6)")

    @staticmethod
    def from_json(obj: dict) -> "ExperimentConfig":
        return ExperimentConfig(**obj)

    def to_json(self) -> dict:
        return asdict(self)

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(theta=self.theta, **self.pipeline)


@dataclass
class ExperimentReport:
    config: dict
    trials: list[dict]
    timings: dict = field(default_factory=dict)

    def canonical_json(self) -> str:
        """Deterministic payload: excludes wall-clock timings."""
        return json.dumps(
            {"config": self.config, "trials": self.trials},
            sort_keys=True,
            separators=(",", ":"),
        )

    def dumps(self) -> str:
        return json.dumps(
            {"config": self.config, "trials": self.trials, "timings": self.timings},
            sort_keys=True,
            indent=2,
        )

    def summary_rows(self) -> list[list]:
        rows = []
        for t in self.trials:
            rows.append(
                [
                    t["trial"],
                    t.get("l1_selected", float("nan")),
                    t.get("l1_selected_stderr", float("nan")),
                    t.get("l1_rough", float("nan")),
                    t.get("n_candidates", 0),
                    t.get("error", ""),
                ]
            )
        return rows


def _trial_mixture(cfg: ExperimentConfig, rng: np.random.Generator) -> GaussianMixture:
    if cfg.mixture is not None:
        model = model_from_json(cfg.mixture)
        if not isinstance(model, GaussianMixture):
            raise ValueError("experiment mixture must be a plain Gaussian mixture")
        return model
    return random_regular_mixture(cfg.k, cfg.d, cfg.alpha, cfg.gamma, cfg.theta, rng)


def _run_trial(cfg: ExperimentConfig, trial: int) -> dict:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(trial,)))
    t0 = time.perf_counter()
    record: dict = {"trial": trial}
    try:
        truth = _trial_mixture(cfg, rng)
        adv = Adversary(**cfg.adversary)
        data = sample_and_corrupt(truth, cfg.n, cfg.eps, adv, rng)

        rough_spec = dict(cfg.rough)
        kind = rough_spec.pop("kind", "oracle")
        if kind == "oracle":
            rough = oracle_rough_estimates(
                truth, rough_spec.get("exponent", 0.25), cfg.eps, rng
            )
        elif kind == "em":
            rough = em_rough_estimates(
                data, cfg.k, rough_spec.get("restarts", 3), rng, eps=cfg.eps
            )
        else:
            raise ValueError(f"unknown rough estimator {kind!r}")

        pcfg = cfg.pipeline_config()
        candidates = enumerate_candidates(data, rough, cfg.eps, pcfg)
        if not candidates:
            raise RuntimeError("no candidates produced")
        sel_idx, diag = scheffe_select(candidates, data, cfg.scheffe_budget, rng)
        selected = candidates[sel_idx]

        l1, l1_err = estimate_l1(selected.model, truth, cfg.l1_budget, rng)
        l1_rough, l1_rough_err = estimate_l1(rough.candidates[0], truth, cfg.l1_budget, rng)
        record.update(
            {
                "l1_selected": l1,
                "l1_selected_stderr": l1_err,
                "l1_rough": l1_rough,
                "l1_rough_stderr": l1_rough_err,
                "n_candidates": len(candidates),
                "selected": selected.provenance,
                "tournament_wins": diag["wins"],
                "selected_model": model_to_json(selected.model),
            }
        )
    except Exception as exc:  # record per-trial failures, keep going
        record["error"] = f"{type(exc).__name__}: {exc}"
    record["_elapsed"] = time.perf_counter() - t0
    return record


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run all trials; failures are recorded per-trial, not raised."""
    t0 = time.perf_counter()
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            trials = list(pool.map(lambda t: _run_trial(cfg, t), range(cfg.trials)))
    else:
        trials = [_run_trial(cfg, t) for t in range(cfg.trials)]
    trials.sort(key=lambda r: r["trial"])
    timings = {
        "total_seconds": time.perf_counter() - t0,
        "per_trial_seconds": [r.pop("_elapsed") for r in trials],
    }
    return ExperimentReport(config=cfg.to_json(), trials=trials, timings=timings)
