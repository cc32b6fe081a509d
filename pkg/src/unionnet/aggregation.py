"""Support sets and attention-weighted label aggregation.

For each labeled anchor, context nodes harvested by random walks vote on the
anchor's class with softmax(inner product) attention in embedding space. The
aggregated distribution yields the anchor's reweighting score (mass at its
given label), corrected label (argmax), and correction confidence (max).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, WalkConfig, collect_context


@dataclass(frozen=True)
class SupportSet:
    """Ordered context multiset for one anchor.

    given[i] is True when member i carries its (noisy) training label,
    False when it carries the model's current argmax prediction. degenerate
    means no context could be found, not even direct neighbors.
    """

    anchor: int
    members: np.ndarray         # member node ids, multiplicity kept
    labels: np.ndarray          # effective label per member
    given: np.ndarray           # bool, label source per member
    degenerate: bool = False

    def __len__(self) -> int:
        return self.members.size


@dataclass(frozen=True)
class AggregationResult:
    distribution: np.ndarray    # P(y | anchor, S), length m
    p_r: float                  # mass at the anchor's given label
    y_corrected: int            # argmax class (smallest index on ties)
    p_c: float                  # max of the distribution


def build_support_set(graph: Graph, anchor: int, cfg: WalkConfig,
                      labels_noisy: np.ndarray, train_mask: np.ndarray,
                      predictions: np.ndarray,
                      rng: np.random.Generator) -> SupportSet:
    """Walk-collected support set with effective labels attached.

    Falls back to the anchor's direct neighbors when the walks return
    nothing (isolated anchors get the degenerate flag instead).
    """
    if not train_mask[anchor]:
        raise ValueError(f"anchor {anchor} is not a training node")
    members = collect_context(graph, anchor, cfg, rng)
    if members.size == 0:
        members = graph.neighbors(anchor).astype(np.int64)
    if members.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return SupportSet(anchor=int(anchor), members=empty,
                          labels=empty.copy(), given=np.empty(0, dtype=bool),
                          degenerate=True)
    given = train_mask[members]
    labels = np.where(given, labels_noisy[members], predictions[members])
    return SupportSet(anchor=int(anchor), members=members,
                      labels=labels.astype(np.int64), given=given)


def aggregate(embeddings: np.ndarray, support: SupportSet, given_label: int,
              n_classes: int) -> AggregationResult:
    """Attention-aggregate member labels into the anchor's class distribution.

    Attention over members is softmax of <h_member, h_anchor>, shifted by the
    max score for stability. Ties in the argmax resolve to the smallest class
    index.
    """
    if support.degenerate or len(support) == 0:
        raise ValueError("cannot aggregate a degenerate support set")
    scores = embeddings[support.members] @ embeddings[support.anchor]
    scores = scores - scores.max()
    w = np.exp(scores)
    w /= w.sum()
    dist = np.zeros(n_classes)
    np.add.at(dist, support.labels, w)
    y_c = int(np.argmax(dist))
    return AggregationResult(
        distribution=dist,
        p_r=float(dist[given_label]),
        y_corrected=y_c,
        p_c=float(dist[y_c]),
    )


def aggregate_anchors(graph: Graph, embeddings: np.ndarray,
                      labels_noisy: np.ndarray, predictions: np.ndarray,
                      cfg: WalkConfig, rng: np.random.Generator,
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-anchor (anchors, p_r, y_corrected, p_c) over all training nodes.

    Degenerate anchors (no context at all) fall back to p_r = 1, corrected
    label = given label, p_c = 0: they contribute standard cross entropy only.
    """
    anchors = np.flatnonzero(graph.train_mask)
    p_r = np.ones(anchors.size)
    y_c = labels_noisy[anchors].astype(np.int64).copy()
    p_c = np.zeros(anchors.size)
    for k, anchor in enumerate(anchors):
        support = build_support_set(graph, int(anchor), cfg, labels_noisy,
                                    graph.train_mask, predictions, rng)
        if support.degenerate:
            continue
        res = aggregate(embeddings, support, int(labels_noisy[anchor]), graph.m)
        p_r[k] = res.p_r
        y_c[k] = res.y_corrected
        p_c[k] = res.p_c
    return anchors, p_r, y_c, p_c


def write_diagnostics(path, anchors, p_r, p_c, y_given, y_corrected) -> Path:
    """Per-epoch noise-audit TSV: anchor, p_r, p_c, given and corrected label."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("anchor\tp_r\tp_c\ty_given\ty_corrected\n")
        for a, r, c, yg, yc in zip(anchors, p_r, p_c, y_given, y_corrected):
            fh.write(f"{int(a)}\t{float(r)!r}\t{float(c)!r}\t{int(yg)}\t{int(yc)}\n")
    return out
