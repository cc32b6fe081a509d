"""Load/save graphs in the text bundle format and generate SBM test graphs.

Bundle layout (line-oriented UTF-8, tab-separated):
  meta.tsv      one line: name <TAB> n <TAB> d <TAB> m
  edges.tsv     one `i <TAB> j` pair per line, 0-based, unordered
  features.tsv  n lines of d decimal floats
  labels.tsv    n lines, one integer class id
  masks.tsv     n lines, one of train|val|test|none
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph

BUNDLE_FILES = ("meta.tsv", "edges.tsv", "features.tsv", "labels.tsv", "masks.tsv")
MASK_TOKENS = ("train", "val", "test", "none")


class BundleError(Exception):
    """Base class for bundle load failures."""


class BundleMissingFile(BundleError):
    pass


class BundleDimensionMismatch(BundleError):
    pass


class BundleLabelError(BundleError):
    pass


class BundleParseError(BundleError):
    pass


def _fmt(x: float) -> str:
    # shortest round-trip decimal; guarantees bitwise float64 round-trips
    return repr(float(x))


def load_bundle(path) -> Graph:
    """Load a Graph from a bundle directory.

    Duplicate edges are deduplicated; self-loops are dropped (one warning
    with the count). Raises a named BundleError subclass on missing files,
    dimension mismatches, or out-of-range labels.
    """
    root = Path(path)
    for fname in BUNDLE_FILES:
        if not (root / fname).is_file():
            raise BundleMissingFile(f"bundle file missing: {root / fname}")

    meta_line = (root / "meta.tsv").read_text(encoding="utf-8").strip("\n")
    parts = meta_line.split("\t")
    if len(parts) != 4:
        raise BundleParseError(f"meta.tsv must hold 'name\\tn\\td\\tm', got {meta_line!r}")
    name = parts[0]
    try:
        n, d, m = (int(p) for p in parts[1:])
    except ValueError as exc:
        raise BundleParseError(f"meta.tsv counts are not integers: {meta_line!r}") from exc

    feat_lines = (root / "features.tsv").read_text(encoding="utf-8").splitlines()
    if len(feat_lines) != n:
        raise BundleDimensionMismatch(
            f"features.tsv has {len(feat_lines)} rows, meta says n={n}")
    features = np.empty((n, d), dtype=np.float64)
    for i, line in enumerate(feat_lines):
        cells = line.split("\t")
        if len(cells) != d:
            raise BundleDimensionMismatch(
                f"features.tsv row {i} has {len(cells)} columns, meta says d={d}")
        try:
            features[i] = [float(c) for c in cells]
        except ValueError as exc:
            raise BundleParseError(f"features.tsv row {i} is not numeric") from exc

    label_lines = (root / "labels.tsv").read_text(encoding="utf-8").splitlines()
    if len(label_lines) != n:
        raise BundleDimensionMismatch(
            f"labels.tsv has {len(label_lines)} rows, meta says n={n}")
    try:
        labels = np.array([int(s) for s in label_lines], dtype=np.int64)
    except ValueError as exc:
        raise BundleParseError("labels.tsv holds a non-integer line") from exc
    if ((labels < -1) | (labels >= m)).any():
        raise BundleLabelError(f"labels.tsv holds class ids outside [0, {m})")

    mask_lines = (root / "masks.tsv").read_text(encoding="utf-8").splitlines()
    if len(mask_lines) != n:
        raise BundleDimensionMismatch(
            f"masks.tsv has {len(mask_lines)} rows, meta says n={n}")
    bad = sorted({t for t in mask_lines if t not in MASK_TOKENS})
    if bad:
        raise BundleParseError(f"masks.tsv holds unknown tokens: {bad}")
    tokens = np.array(mask_lines)

    edge_lines = (root / "edges.tsv").read_text(encoding="utf-8").splitlines()
    edges = []
    self_loops = 0
    for ln, line in enumerate(edge_lines):
        cells = line.split("\t")
        if len(cells) != 2:
            raise BundleParseError(f"edges.tsv line {ln} is not an 'i\\tj' pair")
        try:
            i, j = int(cells[0]), int(cells[1])
        except ValueError as exc:
            raise BundleParseError(f"edges.tsv line {ln} is not numeric") from exc
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"edges.tsv line {ln}: endpoint outside [0, {n})")
        if i == j:
            self_loops += 1
            continue
        edges.append((i, j))
    if self_loops:
        warnings.warn(f"dropped {self_loops} self-loop(s) while loading {root}")
    edge_arr = np.array(edges, dtype=np.int64).reshape(-1, 2)

    return Graph(
        features=features,
        labels=labels,
        m=m,
        edges=edge_arr,
        train_mask=tokens == "train",
        val_mask=tokens == "val",
        test_mask=tokens == "test",
        name=name,
    )


def write_bundle(graph: Graph, path, name: str | None = None) -> Path:
    """Serialize a Graph into a bundle directory (the inverse of load_bundle)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    name = graph.name if name is None else name
    (root / "meta.tsv").write_text(
        f"{name}\t{graph.n}\t{graph.d}\t{graph.m}\n", encoding="utf-8")
    with open(root / "edges.tsv", "w", encoding="utf-8") as fh:
        for i, j in graph.edges:
            fh.write(f"{i}\t{j}\n")
    with open(root / "features.tsv", "w", encoding="utf-8") as fh:
        for row in graph.features:
            fh.write("\t".join(_fmt(x) for x in row) + "\n")
    with open(root / "labels.tsv", "w", encoding="utf-8") as fh:
        for y in graph.labels:
            fh.write(f"{y}\n")
    tokens = np.full(graph.n, "none", dtype=object)
    tokens[graph.train_mask] = "train"
    tokens[graph.val_mask] = "val"
    tokens[graph.test_mask] = "test"
    with open(root / "masks.tsv", "w", encoding="utf-8") as fh:
        for t in tokens:
            fh.write(f"{t}\n")
    return root


@dataclass(frozen=True)
class SbmSpec:
    """Stochastic block model: one class per block, Gaussian features around
    a per-class mean of norm feature_signal."""

    blocks: int
    nodes_per_block: int
    p_in: float
    p_out: float
    feature_dim: int
    feature_signal: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.blocks < 1 or self.nodes_per_block < 1 or self.feature_dim < 1:
            raise ValueError("blocks, nodes_per_block and feature_dim must be positive")
        if not (0.0 <= self.p_out <= self.p_in <= 1.0):
            raise ValueError(f"need 0 <= p_out <= p_in <= 1, got p_in={self.p_in} p_out={self.p_out}")
        if self.feature_signal < 0:
            raise ValueError("feature_signal must be non-negative")


def _sbm_masks(blocks: int, nodes_per_block: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split rule: first 5% (>=1) of each block is train; remaining nodes are
    rank-interleaved across blocks, first 500 val, next 1000 test."""
    n = blocks * nodes_per_block
    train = np.zeros(n, dtype=bool)
    val = np.zeros(n, dtype=bool)
    test = np.zeros(n, dtype=bool)
    t = max(1, math.ceil(0.05 * nodes_per_block))
    for b in range(blocks):
        train[b * nodes_per_block: b * nodes_per_block + t] = True
    # interleave by within-block rank so val/test stay class-balanced
    ranks = np.arange(t, nodes_per_block)
    if ranks.size:
        pool = (ranks[:, None] + np.arange(blocks)[None, :] * nodes_per_block).reshape(-1)
    else:
        pool = np.array([], dtype=np.int64)
    val_ids = pool[:500]
    test_ids = pool[500:1500]
    val[val_ids] = True
    test[test_ids] = True
    return train, val, test


def generate_sbm(spec: SbmSpec) -> Graph:
    """Sample a block-model graph; deterministic for a fixed spec.seed."""
    rng = np.random.default_rng(spec.seed)
    n = spec.blocks * spec.nodes_per_block
    block = np.repeat(np.arange(spec.blocks), spec.nodes_per_block)

    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(block[iu] == block[ju], spec.p_in, spec.p_out)
    keep = rng.random(prob.shape) < prob
    edges = np.column_stack([iu[keep], ju[keep]]).astype(np.int64)

    means = rng.standard_normal((spec.blocks, spec.feature_dim))
    norms = np.linalg.norm(means, axis=1, keepdims=True)
    means = spec.feature_signal * means / np.where(norms == 0, 1.0, norms)
    features = means[block] + rng.standard_normal((n, spec.feature_dim))

    train, val, test = _sbm_masks(spec.blocks, spec.nodes_per_block)
    return Graph(
        features=features,
        labels=block.astype(np.int64),
        m=spec.blocks,
        edges=edges,
        train_mask=train,
        val_mask=val,
        test_mask=test,
        name=f"sbm{spec.blocks}x{spec.nodes_per_block}",
    )
