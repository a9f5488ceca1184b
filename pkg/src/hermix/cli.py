"""Command-line interface.

Subcommands: simulate (corrupted CSV), fit (CSV -> model JSON), eval (two
model JSONs -> L1 JSON), hermite (CSV -> moment estimates JSON), experiment
(config JSON -> report JSON + summary CSV).  All JSON uses snake_case keys;
CSV files carry no header unless --header is given.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import click
import numpy as np

from .harness import (
    Adversary,
    ExperimentConfig,
    estimate_l1,
    run_experiment,
    sample_and_corrupt,
)
from .hermite import GaussianMixture, model_from_json, model_to_json
from .momentest import estimate_hermite_moments
from .pipeline import em_rough_estimates, enumerate_candidates, scheffe_select


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    return json.loads(Path(path).read_text())


def _out_dir(out: str | None) -> Path:
    p = Path(out) if out else Path(".")
    p.mkdir(parents=True, exist_ok=True)
    return p


def _read_csv(path: str, header: bool) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if header and rows:
        rows = rows[1:]
    return np.array([[float(v) for v in row] for row in rows if row])


def _write_csv(path: Path, data: np.ndarray, header: bool) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow([f"x{i}" for i in range(data.shape[1])])
        for row in data:
            writer.writerow([repr(float(v)) for v in row])


@click.group()
def main() -> None:
    """Robust Gaussian-mixture density estimation from corrupted samples."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--header", is_flag=True, default=False)
def simulate(config_path, seed, out, header):
    """Sample a corrupted dataset and write it as CSV."""
    raw = _load_config(config_path)
    if seed is not None:
        raw["seed"] = seed
    cfg = ExperimentConfig.from_json(raw)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    if cfg.mixture is None:
        raise click.UsageError("simulate requires an explicit mixture in the config")
    mix = model_from_json(cfg.mixture)
    data = sample_and_corrupt(mix, cfg.n, cfg.eps, Adversary(**cfg.adversary), rng)
    path = _out_dir(out) / "samples.csv"
    _write_csv(path, data, header)
    click.echo(str(path))


@main.command()
@click.argument("csv_path", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default=None)
@click.option("--header", is_flag=True, default=False)
def fit(csv_path, config_path, seed, out, header):
    """Fit a density model to a (possibly corrupted) CSV of points."""
    raw = _load_config(config_path)
    raw.setdefault("seed", seed)
    cfg = ExperimentConfig.from_json(raw)
    data = _read_csv(csv_path, header)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    rough_spec = dict(cfg.rough)
    kind = rough_spec.pop("kind", "em")
    if kind == "em" or "rough_model" not in raw:
        rough = em_rough_estimates(
            data, cfg.k, rough_spec.get("restarts", 3), rng, eps=cfg.eps
        )
    else:
        from .pipeline import RoughEstimate

        rough = RoughEstimate([model_from_json(raw["rough_model"])])
    candidates = enumerate_candidates(data, rough, cfg.eps, cfg.pipeline_config())
    idx, _ = scheffe_select(candidates, data, cfg.scheffe_budget, rng)
    path = _out_dir(out) / "model.json"
    path.write_text(json.dumps(model_to_json(candidates[idx].model), indent=2, sort_keys=True))
    click.echo(str(path))


@main.command("eval")
@click.argument("model_a", type=click.Path(exists=True))
@click.argument("model_b", type=click.Path(exists=True))
@click.option("--budget", type=int, default=100_000)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default=None)
def eval_cmd(model_a, model_b, budget, seed, out):
    """Estimate the L1 distance between two serialized models."""
    fa = model_from_json(json.loads(Path(model_a).read_text()))
    fb = model_from_json(json.loads(Path(model_b).read_text()))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    est, stderr = estimate_l1(fa, fb, budget, rng)
    path = _out_dir(out) / "l1.json"
    path.write_text(json.dumps({"l1": est, "stderr": stderr}, indent=2, sort_keys=True))
    click.echo(str(path))


@main.command()
@click.argument("csv_path", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--k", type=int, default=None)
@click.option("--m", "m_degree", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--header", is_flag=True, default=False)
def hermite(csv_path, config_path, k, m_degree, out, header):
    """Robustly estimate Hermite moment polynomials from a CSV of points."""
    raw = _load_config(config_path)
    if k is not None:
        raw["k"] = k
    cfg = ExperimentConfig.from_json({kk: v for kk, v in raw.items() if kk != "m"})
    data = _read_csv(csv_path, header)
    m = m_degree if m_degree is not None else raw.get("m", cfg.pipeline_config().m_for(cfg.k))
    est = estimate_hermite_moments(
        data, k=cfg.k, m=m, eps=cfg.eps, theta=cfg.theta
    )
    path = _out_dir(out) / "hermite.json"
    path.write_text(est.dumps())
    click.echo(str(path))


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--threads", type=int, default=None)
def experiment(config_path, seed, out, threads):
    """Run a full experiment; writes report.json and summary.csv."""
    raw = _load_config(config_path)
    if seed is not None:
        raw["seed"] = seed
    if threads is not None:
        raw["threads"] = threads
    cfg = ExperimentConfig.from_json(raw)
    report = run_experiment(cfg)
    out_dir = _out_dir(out)
    (out_dir / "report.json").write_text(report.dumps())
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in report.summary_rows():
            writer.writerow(row)
    click.echo(str(out_dir / "report.json"))


if __name__ == "__main__":
    main()
