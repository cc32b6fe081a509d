"""Experiment driver: noise grids, sensitivity sweeps, result tables.

A grid cell is (method, noise type, noise rate); each cell runs once per
seed. Completed (cell, seed) runs leave a JSON marker in <out>/cells/ and
are never recomputed, so interrupted grids resume where they stopped. The
canonical output is results.csv; results.txt is a derived pretty table.

Per run seed s, three streams are derived with fixed tags so noise
realizations match across methods within a cell: noise = (s, 0),
init = (s, 1), walks = (s, 2).
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import SbmSpec, generate_sbm, load_bundle
from .gcn import TrainHyper
from .graph import Graph, WalkConfig, normalize_adjacency
from .noise import NOISE_TYPES, build_transition, corrupt_labels
from .training import METHODS, TrainConfig, train

SWEEP_PARAMETERS = ("alpha", "beta", "walk_length")


def derive_seeds(seed: int) -> tuple[int, int, int]:
    """(noise, init, walks) integer seeds derived from one run seed."""
    return tuple(
        int(np.random.SeedSequence((seed, tag)).generate_state(1)[0])
        for tag in (0, 1, 2)
    )


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce a grid or sweep from one file."""

    name: str
    noise_grid: tuple[tuple[str, float], ...]
    methods: tuple[str, ...]
    seeds: tuple[int, ...]
    bundle: str | None = None
    sbm: SbmSpec | None = None
    alpha: float = 0.5
    beta: float = 1.0
    walk_length: int = 10
    walks_per_node: int = 10
    epochs: int = 400
    pretrain_epochs: int = 40
    patience: int | None = None
    gce_q: float = 0.7
    hyper: TrainHyper = field(default_factory=TrainHyper)

    def __post_init__(self):
        if (self.bundle is None) == (self.sbm is None):
            raise ValueError("spec needs exactly one of 'bundle' or 'sbm'")
        if not self.noise_grid or not self.methods or not self.seeds:
            raise ValueError("noise_grid, methods and seeds must be non-empty")
        for ntype, rate in self.noise_grid:
            if ntype not in NOISE_TYPES or not 0.0 <= rate < 1.0:
                raise ValueError(f"bad noise cell ({ntype!r}, {rate})")
        for method in self.methods:
            if method not in METHODS:
                raise ValueError(f"unknown method {method!r}")

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentSpec":
        raw = dict(raw)
        if "sbm" in raw and raw["sbm"] is not None:
            raw["sbm"] = SbmSpec(**raw["sbm"])
        if "hyper" in raw and raw["hyper"] is not None:
            raw["hyper"] = TrainHyper(**raw["hyper"])
        raw["noise_grid"] = tuple((str(t), float(r)) for t, r in raw["noise_grid"])
        raw["methods"] = tuple(raw["methods"])
        raw["seeds"] = tuple(int(s) for s in raw["seeds"])
        return cls(**raw)

    def to_json(self, path) -> Path:
        out = Path(path)
        blob = asdict(self)
        out.write_text(json.dumps(blob, indent=2) + "\n", encoding="utf-8")
        return out

    def load_graph(self) -> Graph:
        if self.bundle is not None:
            return load_bundle(self.bundle)
        return generate_sbm(self.sbm)

    def train_config(self, method: str, seed: int) -> TrainConfig:
        noise_seed, init_seed, walk_seed = derive_seeds(seed)
        return TrainConfig(
            method=method,
            alpha=self.alpha,
            beta=self.beta,
            walk=WalkConfig(self.walk_length, self.walks_per_node, seed=walk_seed),
            hyper=self.hyper,
            epochs=self.epochs,
            pretrain_epochs=self.pretrain_epochs,
            patience=self.patience,
            gce_q=self.gce_q,
            seed=init_seed,
        )


@dataclass(frozen=True)
class CellResult:
    dataset: str
    method: str
    noise_type: str
    noise_rate: float
    mean_f1: float | None
    std_f1: float | None
    n_seeds: int
    failed: int

    @property
    def ok(self) -> bool:
        return self.failed == 0


@dataclass
class ResultsTable:
    rows: list[CellResult]

    @property
    def any_failed(self) -> bool:
        return any(not r.ok for r in self.rows)

    def cell(self, method: str, noise_type: str, rate: float) -> CellResult:
        for r in self.rows:
            if (r.method, r.noise_type) == (method, noise_type) and math.isclose(r.noise_rate, rate):
                return r
        raise KeyError((method, noise_type, rate))

    def to_csv(self) -> str:
        lines = ["dataset,method,noise_type,noise_rate,mean_f1,std_f1,n_seeds,failed"]
        for r in self.rows:
            mean = "" if r.mean_f1 is None else repr(r.mean_f1)
            std = "" if r.std_f1 is None else repr(r.std_f1)
            lines.append(f"{r.dataset},{r.method},{r.noise_type},{r.noise_rate:g},"
                         f"{mean},{std},{r.n_seeds},{r.failed}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        header = f"{'method':<14}{'noise':<12}{'rate':>6}  {'micro-F1 (mean ± std)':<24}{'runs':>5}"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            if r.mean_f1 is None:
                score = "FAILED"
            else:
                score = f"{r.mean_f1:.4f} ± {0.0 if r.std_f1 is None else r.std_f1:.4f}"
                if r.failed:
                    score += f" ({r.failed} failed)"
            lines.append(f"{r.method:<14}{r.noise_type:<12}{r.noise_rate:>6g}  {score:<24}{r.n_seeds:>5}")
        return "\n".join(lines) + "\n"


def _atomic_write(path: Path, text: str):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _run_marked(marker: Path, graph, adj, spec: ExperimentSpec, method: str,
                noise_type: str, rate: float, seed: int,
                overrides: dict | None = None) -> dict:
    """Run one (cell, seed) unless its marker already exists."""
    if marker.is_file():
        return json.loads(marker.read_text(encoding="utf-8"))
    cfg = spec.train_config(method, seed)
    if overrides:
        walk = cfg.walk
        if "walk_length" in overrides:
            walk = WalkConfig(int(overrides["walk_length"]), walk.walks_per_node, walk.seed)
        cfg = replace(cfg,
                      alpha=float(overrides.get("alpha", cfg.alpha)),
                      beta=float(overrides.get("beta", cfg.beta)),
                      walk=walk)
    noise_seed = derive_seeds(seed)[0]
    try:
        q = build_transition(noise_type, rate, graph.m)
        corrupted = corrupt_labels(graph, q, noise_seed)
        run = train(graph, corrupted.labels_noisy, cfg, adj=adj,
                    log_path=marker.with_name(marker.stem + ".log.csv"))
        payload = {
            "status": "ok",
            "test_f1": run.test_f1,
            "val_f1": run.best_val_f1,
            "best_epoch": run.best_epoch,
            "seed": seed,
            "wall_time": run.wall_time,
        }
    except Exception as exc:  # cell failures are recorded, the grid continues
        payload = {"status": "failed", "error": f"{type(exc).__name__}: {exc}", "seed": seed}
    _atomic_write(marker, json.dumps(payload, indent=2) + "\n")
    return payload


def _aggregate(dataset: str, method: str, noise_type: str, rate: float,
               payloads: list[dict]) -> CellResult:
    scores = [p["test_f1"] for p in payloads if p["status"] == "ok"]
    failed = sum(1 for p in payloads if p["status"] != "ok")
    mean = float(np.mean(scores)) if scores else None
    std = float(np.std(scores)) if scores else None
    return CellResult(dataset=dataset, method=method, noise_type=noise_type,
                      noise_rate=rate, mean_f1=mean, std_f1=std,
                      n_seeds=len(payloads), failed=failed)


def run_experiment(spec: ExperimentSpec, out_dir, master_seed: int = 0) -> ResultsTable:
    """Run the full grid; resumes from existing cell markers in out_dir."""
    out = Path(out_dir)
    cells_dir = out / "cells"
    cells_dir.mkdir(parents=True, exist_ok=True)
    graph = spec.load_graph()
    adj = normalize_adjacency(graph)
    rows = []
    for noise_type, rate in spec.noise_grid:
        for method in spec.methods:
            payloads = []
            for seed in spec.seeds:
                seed = seed + master_seed
                marker = cells_dir / f"{method}__{noise_type}__{rate:g}__s{seed}.json"
                payloads.append(_run_marked(marker, graph, adj, spec, method,
                                            noise_type, rate, seed))
            rows.append(_aggregate(graph.name or spec.name, method, noise_type,
                                   rate, payloads))
    table = ResultsTable(rows)
    _atomic_write(out / "results.csv", table.to_csv())
    _atomic_write(out / "results.txt", table.to_text())
    return table


@dataclass(frozen=True)
class SweepPoint:
    value: float
    mean_f1: float | None
    std_f1: float | None
    failed: int


def run_sweep(spec: ExperimentSpec, parameter: str, values, out_dir,
              master_seed: int = 0) -> list[SweepPoint]:
    """Sensitivity sweep over alpha, beta, or walk_length.

    Base configuration is the spec's first method and first noise cell;
    invalid sweep values are dropped with a warning. Emits sweep_<param>.csv
    with columns value,mean_f1,std_f1.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMETERS}")
    out = Path(out_dir)
    cells_dir = out / "cells"
    cells_dir.mkdir(parents=True, exist_ok=True)
    method = spec.methods[0]
    noise_type, rate = spec.noise_grid[0]
    graph = spec.load_graph()
    adj = normalize_adjacency(graph)

    valid = []
    for v in values:
        if parameter == "alpha" and not 0.0 <= v <= 1.0:
            warnings.warn(f"dropping alpha={v}: outside [0, 1]")
        elif parameter == "beta" and v < 0:
            warnings.warn(f"dropping beta={v}: negative")
        elif parameter == "walk_length" and (v < 1 or int(v) != v):
            warnings.warn(f"dropping walk_length={v}: not a positive integer")
        else:
            valid.append(v)

    points = []
    for v in valid:
        payloads = []
        for seed in spec.seeds:
            seed = seed + master_seed
            marker = cells_dir / f"sweep_{parameter}_{v:g}__{method}__{noise_type}__{rate:g}__s{seed}.json"
            payloads.append(_run_marked(marker, graph, adj, spec, method,
                                        noise_type, rate, seed,
                                        overrides={parameter: v}))
        agg = _aggregate(graph.name or spec.name, method, noise_type, rate, payloads)
        points.append(SweepPoint(value=float(v), mean_f1=agg.mean_f1,
                                 std_f1=agg.std_f1, failed=agg.failed))

    lines = ["value,mean_f1,std_f1"]
    for p in points:
        mean = "" if p.mean_f1 is None else repr(p.mean_f1)
        std = "" if p.std_f1 is None else repr(p.std_f1)
        lines.append(f"{p.value:g},{mean},{std}")
    _atomic_write(out / f"sweep_{parameter}.csv", "\n".join(lines) + "\n")
    return points
