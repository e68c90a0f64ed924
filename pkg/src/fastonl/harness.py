"""Experiment orchestration: configs, multi-trial runs and CSV exports."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import approximate_run, weighted_majority_run
from .graph import Graph, GraphFormatError, LabelSequence, karate, largest_connected_component, load_dataset, load_order
from .kernel import KernelSpec, derive_alpha, parse_lambda
from .learner import PREDICT_MODES, fastonl_run, relaxation_run
from .push import PushConfig, Pusher, default_epsilon, stats_record, theoretical_bounds

METHODS = ("relaxation", "fastonl", "wm", "approximate")
DATA_ENV = "FASTONL_DATA"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    dataset: str = "karate"
    method: str = "fastonl"
    kernel: str = "K2"
    lam: str | float = "0.15n"
    beta: float = 0.0
    b: float = 0.0
    s: str = "I"
    eps: float | None = None
    trials: int = 1
    seed: int = 0
    order: str = "dataset"  # "dataset", "shuffle" or a path to an order file
    out: str = "results"
    lcc: bool = True
    precompute: bool = False
    trace_coef: float | None = None
    trace_init: float | str | None = None
    power_p: int = 3
    count_votes: bool = False
    predict: str = "sample"
    timing: bool = True
    workers: int = 1

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.method == "approximate" and str(self.kernel).upper() not in ("K2", "2"):
            raise ConfigError("the approximate method uses the K2 power series only")
        if self.predict not in PREDICT_MODES:
            raise ConfigError(f"predict must be one of {PREDICT_MODES}, got {self.predict!r}")
        if self.eps is not None and not self.eps > 0:
            raise ConfigError("eps must be positive")
        try:
            KernelSpec(self.kernel, 1.0, self.beta or 1.0, self.b, self.s)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def kernel_spec(self, n: int) -> KernelSpec:
        try:
            spec = KernelSpec(self.kernel, parse_lambda(self.lam, n), self.beta, self.b, self.s)
            derive_alpha(spec, n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return spec

    @classmethod
    def from_dict(cls, obj: dict) -> ExperimentConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        obj = dict(obj)
        if "lambda" in obj:
            obj["lam"] = obj.pop("lambda")
        unknown = set(obj) - names
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def from_json(cls, path) -> ExperimentConfig:
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def resolve_dataset(name: str) -> tuple[Path, Path, Path | None] | None:
    """Locate ``edges.txt``/``labels.txt`` (and optional ``order.txt``) for a dataset.

    ``name`` is a directory, or a bare name looked up under ``$FASTONL_DATA``.
    Returns ``None`` for the bundled karate graph.
    """
    if name == "karate":
        return None
    root = Path(name)
    if not root.is_dir() and os.environ.get(DATA_ENV):
        root = Path(os.environ[DATA_ENV]) / name
    edges, labels = root / "edges.txt", root / "labels.txt"
    if not (edges.is_file() and labels.is_file()):
        raise FileNotFoundError(f"dataset {name!r}: expected edges.txt and labels.txt in {root}")
    order = root / "order.txt"
    return edges, labels, order if order.is_file() else None


def load_experiment_data(name: str, lcc: bool = True, order: str = "dataset") -> tuple[Graph, LabelSequence]:
    found = resolve_dataset(name)
    if found is None:
        g, labels = karate()
    else:
        edges, label_path, order_path = found
        g, labels = load_dataset(edges, label_path, order_path if order == "dataset" else None)
    if order not in ("dataset", "shuffle"):
        ids = load_order(order)
        pos = np.searchsorted(g.node_ids, ids)
        pos = np.minimum(pos, g.n - 1)
        if np.any(g.node_ids[pos] != ids):
            raise GraphFormatError(f"{order}: unknown node id in order file")
        labels = labels.with_order(pos)
    if lcc:
        g, labels = largest_connected_component(g, labels)
    return g, labels


def run_trial(g: Graph, labels: LabelSequence, cfg: ExperimentConfig, trial: int):
    seed = cfg.seed + trial
    if cfg.order == "shuffle":
        labels = labels.shuffled(seed)
    if cfg.method == "wm":
        return weighted_majority_run(g, labels, seed, cfg.count_votes)
    spec = cfg.kernel_spec(g.n)
    if cfg.method == "relaxation":
        coef = 4.0 if cfg.trace_coef is None else cfg.trace_coef
        return relaxation_run(g, labels, spec, seed, trace_coef=coef, predict=cfg.predict)
    if cfg.method == "approximate":
        return approximate_run(g, labels, spec.lam, cfg.power_p, seed, cfg.trace_coef, cfg.trace_init,
                               predict=cfg.predict)
    return fastonl_run(g, labels, spec, cfg.eps, seed, cfg.precompute, cfg.trace_coef, cfg.trace_init,
                       predict=cfg.predict)


def _trial_job(args):
    g, labels, cfg, trial = args
    start = time.perf_counter()
    rec = run_trial(g, labels, cfg, trial)
    return rec, time.perf_counter() - start


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run all trials, writing ``trial_XX.csv`` files and ``summary.json`` under ``cfg.out``."""
    cfg.validate()
    g, labels = load_experiment_data(cfg.dataset, cfg.lcc, cfg.order)
    if cfg.method != "wm":
        cfg.kernel_spec(g.n)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    jobs = [(g, labels, cfg, i) for i in range(cfg.trials)]
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_trial_job, jobs))
    else:
        results = [_trial_job(job) for job in jobs]
    trials = []
    for i, (rec, seconds) in enumerate(results):
        rec.to_csv(out / f"trial_{i:02d}.csv", node_ids=g.node_ids, timing=cfg.timing)
        trials.append({"trial": i, "seed": cfg.seed + i, "accuracy": rec.accuracy, "mistakes": rec.mistakes,
                       "seconds": seconds, "mean_step_micros": float(rec.micros.mean())})
    accs = np.array([t["accuracy"] for t in trials])
    summary = {
        "config": cfg.to_dict(),
        "graph": {"n": g.n, "m": g.m, "k": labels.k, "steps": len(labels)},
        "eps": (cfg.eps or default_epsilon(g.n)) if cfg.method in ("fastonl",) else None,
        "accuracy": float(accs.mean()),
        "accuracy_std": float(accs.std()),
        "mean_step_micros": float(np.mean([t["mean_step_micros"] for t in trials])),
        "total_seconds": time.perf_counter() - start,
        "trials": trials,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return summary


def default_eps_grid(alpha: float, n: int, points: int = 9) -> np.ndarray:
    """Geometric grid over ``[1e-2, 1e2] * sqrt((1 - alpha)/(1 + alpha)) / n``."""
    base = math.sqrt((1 - alpha) / (1 + alpha)) / n if alpha < 1 else 1.0 / n
    return base * np.logspace(-2, 2, points)


def sample_sources(g: Graph, count: int, seed=0) -> np.ndarray:
    candidates = np.flatnonzero(g.d > 0)
    if count >= len(candidates):
        return candidates
    return np.sort(np.random.default_rng(seed).choice(candidates, count, replace=False))


BOUND_FIELDS = ["eps", "sources", "rt_mean", "andersen", "local", "poweriter",
                "max_rt_over_andersen", "max_rt_over_local", "andersen_violations", "local_violations",
                "andersen_literal", "andersen_literal_violations", "local_literal_violations"]


def export_bound_comparison(g: Graph, alpha: float, eps_grid, sources, path=None, kind="L",
                            stats_path=None) -> list[dict]:
    """Measured push cost against the three bounds, one row per epsilon.

    ``andersen`` and ``local`` are averaged over the sources; the ratio and
    violation columns are per push. ``stats_path`` also dumps one JSON line
    per push. The ``*_literal`` columns use the commonly quoted forms of the
    bounds, which can undercount Type-Lap pushes.
    """
    rows = []
    stats_fh = open(stats_path, "w", encoding="utf-8") if stats_path else None
    try:
        for eps in eps_grid:
            cfg = PushConfig(alpha, float(eps), kind)
            pusher = Pusher(g, cfg)
            measured, glob, loc, glob_lit, loc_lit = [], [], [], [], []
            for s in sources:
                st = pusher.push(int(s)).stats
                b = theoretical_bounds(st, cfg, g)
                measured.append(st.R_T)
                glob.append(b["andersen"])
                loc.append(b["local"])
                glob_lit.append(b["andersen_literal"])
                loc_lit.append(b["local_literal"])
                poweriter = b["poweriter"]
                if stats_fh:
                    stats_fh.write(json.dumps(stats_record(st, cfg, g)) + "\n")
            measured, glob, loc, glob_lit, loc_lit = map(np.array, (measured, glob, loc, glob_lit, loc_lit))
            active = measured > 0
            rows.append({
                "eps": float(eps), "sources": len(measured), "rt_mean": float(measured.mean()),
                "andersen": float(glob.mean()), "local": float(loc.mean()), "poweriter": poweriter,
                "max_rt_over_andersen": float((measured / glob).max()),
                "max_rt_over_local": float((measured[active] / loc[active]).max()) if active.any() else 0.0,
                "andersen_violations": int(np.sum(measured > glob)),
                "local_violations": int(np.sum(measured > loc)),
                "andersen_literal": float(glob_lit[0]),
                "andersen_literal_violations": int(np.sum(measured > glob_lit)),
                "local_literal_violations": int(np.sum(measured > loc_lit)),
            })
    finally:
        if stats_fh:
            stats_fh.close()
    if path is not None:
        _write_csv(path, BOUND_FIELDS, rows)
    return rows


def export_power_law(g: Graph, cfg: PushConfig, sources, path=None) -> list[dict]:
    """Rank-sorted ``|x_i|`` of the push estimate for each source."""
    pusher = Pusher(g, cfg)
    rows = []
    for s in sources:
        x = pusher.push(int(s)).x
        mags = np.sort(np.abs(x.values))[::-1]
        rows.extend({"source": int(g.node_ids[s]), "rank": r + 1, "magnitude": float(v)} for r, v in enumerate(mags))
    if path is not None:
        _write_csv(path, ["source", "rank", "magnitude"], rows)
    return rows


def _write_csv(path, fields, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
