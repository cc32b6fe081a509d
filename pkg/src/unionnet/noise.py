"""Noise transition matrices and transductive label corruption.

Q[i][j] is the probability of a clean class-i training label being recorded
as class j. Corruption touches train-mask nodes only; validation and test
labels stay clean.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph

NOISE_TYPES = ("symmetric", "pairflip")


@dataclass(frozen=True)
class TransitionMatrix:
    q: np.ndarray           # m x m row-stochastic
    noise_type: str
    rate: float

    @property
    def m(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class CorruptedLabels:
    """Full-length label vector with train entries possibly flipped.

    flip_log lists (node, clean, noisy) for every train node whose label
    actually changed.
    """

    labels_noisy: np.ndarray
    flip_log: tuple[tuple[int, int, int], ...]


def build_transition(noise_type: str, rate: float, m: int) -> TransitionMatrix:
    """Row-stochastic m x m corruption matrix.

    symmetric: off-diagonal mass rate spread uniformly over the other m-1
    classes. pairflip: all of rate goes to the cyclic successor (i+1) mod m.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"noise rate must be in [0, 1), got {rate}")
    if m < 2:
        raise ValueError(f"need at least 2 classes, got {m}")
    if noise_type not in NOISE_TYPES:
        raise ValueError(f"noise_type must be one of {NOISE_TYPES}, got {noise_type!r}")
    if noise_type == "symmetric":
        q = np.full((m, m), rate / (m - 1))
        np.fill_diagonal(q, 1.0 - rate)
    else:
        q = np.zeros((m, m))
        np.fill_diagonal(q, 1.0 - rate)
        q[np.arange(m), (np.arange(m) + 1) % m] = rate
    q.setflags(write=False)
    return TransitionMatrix(q=q, noise_type=noise_type, rate=rate)


def corrupt_labels(graph: Graph, q: TransitionMatrix, seed: int) -> CorruptedLabels:
    """Sample a noisy label for each train node from its clean label's Q row."""
    if q.m != graph.m:
        raise ValueError(f"transition matrix is {q.m}-class, graph has {graph.m}")
    labels = graph.labels.copy()
    train_idx = np.flatnonzero(graph.train_mask)
    rng = np.random.default_rng(seed)
    # inverse-CDF draw per node from its clean label's row
    u = rng.random(train_idx.size)
    cum = np.cumsum(q.q, axis=1)[labels[train_idx]]
    noisy = np.minimum((u[:, None] >= cum).sum(axis=1), q.m - 1)
    clean = labels[train_idx]
    flipped = noisy != clean
    flips = tuple(
        (int(node), int(c), int(nz))
        for node, c, nz in zip(train_idx[flipped], clean[flipped], noisy[flipped])
    )
    labels[train_idx] = noisy
    labels.setflags(write=False)
    return CorruptedLabels(labels_noisy=labels, flip_log=flips)


def write_flip_log(corrupted: CorruptedLabels, path) -> Path:
    """Audit TSV: node <TAB> clean <TAB> noisy, one line per actual flip."""
    out = Path(path)
    with open(out, "w", encoding="utf-8") as fh:
        for node, clean, noisy in corrupted.flip_log:
            fh.write(f"{node}\t{clean}\t{noisy}\n")
    return out
