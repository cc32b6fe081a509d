"""Assemble a PlanetoidSource into the text bundle format.

The distribution stores test-shard rows in test-index order and, on
Citeseer, skips isolated test nodes entirely; assembly reorders rows into
node-id order and preserves the skipped rows as all-zero feature vectors
with no label. Adjacency lists are symmetrized and self-loops dropped.
Features are row-normalized (zero rows stay zero) so the emitted bundle is
ready for training as-is. Output is deterministic: converting twice yields
byte-identical bundles.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .loader import ConverterError, PlanetoidSource, load_source

BUNDLE_FILES = ("meta.tsv", "edges.tsv", "features.tsv", "labels.tsv", "masks.tsv")


def _fmt(x: float) -> str:
    return repr(float(x))


def assemble(source: PlanetoidSource):
    """(features, labels, class count, train/val/test masks, edges), node-id order.

    labels hold -1 for nodes with no one-hot row (isolated filled-in test
    nodes); those nodes are never masked.
    """
    n = source.n
    d = source.allx.shape[1]
    m = source.ally.shape[1]

    if np.unique(source.test_index).size != source.test_index.size:
        raise ConverterError("duplicate test indices")
    test_sorted = np.sort(source.test_index)
    full_range = np.arange(test_sorted.min(), test_sorted.max() + 1) \
        if test_sorted.size else np.empty(0, dtype=np.int64)
    # tx/ty rows are in test-index FILE order; scatter them into node-id order
    # over the contiguous range. Citeseer skips isolated test nodes entirely:
    # the uncovered slots stay all-zero (no features, no one-hot label).
    tx = sp.lil_matrix((full_range.size, d), dtype=np.float64)
    ty = np.zeros((full_range.size, m), dtype=np.float64)
    offsets = source.test_index - (full_range[0] if full_range.size else 0)
    tx[offsets] = source.tx.astype(np.float64)
    ty[offsets] = source.ty
    tx = tx.tocsr()
    if source.allx.shape[0] + tx.shape[0] != n:
        raise ConverterError(
            f"allx rows ({source.allx.shape[0]}) + test rows ({tx.shape[0]}) "
            f"do not cover the {n}-node graph")
    if full_range.size and full_range[0] != source.allx.shape[0]:
        raise ConverterError(
            "test index range does not start where allx ends; "
            "not a standard-layout distribution")

    features = sp.vstack([source.allx, tx]).tolil()
    onehot = np.vstack([source.ally, ty]).astype(np.float64)
    # the stacked order puts test rows at the tail; move them to their node ids
    tail = np.arange(source.allx.shape[0], n)
    order = np.arange(n)
    order[full_range] = tail
    features = features[order].tocsr().astype(np.float64)
    onehot = onehot[order]

    row_sums = np.asarray(features.sum(axis=1)).ravel()
    scale = np.divide(1.0, row_sums, out=np.zeros_like(row_sums),
                      where=row_sums != 0)
    features = sp.diags(scale) @ features

    labels = np.where(onehot.sum(axis=1) > 0, onehot.argmax(axis=1), -1)

    train_mask = np.zeros(n, dtype=bool)
    val_mask = np.zeros(n, dtype=bool)
    test_mask = np.zeros(n, dtype=bool)
    n_train = source.y.shape[0]
    train_mask[:n_train] = True
    val_mask[n_train:min(n_train + 500, source.allx.shape[0])] = True
    test_mask[test_sorted] = True
    if (train_mask & test_mask).any() or (val_mask & test_mask).any():
        raise ConverterError("train/val indices collide with test indices")

    edges = set()
    for node, nbrs in source.graph.items():
        for nbr in nbrs:
            if node == nbr:
                continue
            edges.add((min(int(node), int(nbr)), max(int(node), int(nbr))))
    edge_arr = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)

    return (features, labels.astype(np.int64), m, train_mask, val_mask,
            test_mask, edge_arr)


def write_bundle_files(out_dir, name, features: sp.csr_matrix, labels, m,
                       train_mask, val_mask, test_mask, edges) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n, d = features.shape
    (out / "meta.tsv").write_text(f"{name}\t{n}\t{d}\t{m}\n", encoding="utf-8")
    with open(out / "edges.tsv", "w", encoding="utf-8") as fh:
        for i, j in edges:
            fh.write(f"{i}\t{j}\n")
    dense = features.toarray()
    with open(out / "features.tsv", "w", encoding="utf-8") as fh:
        for row in dense:
            fh.write("\t".join(_fmt(x) for x in row) + "\n")
    with open(out / "labels.tsv", "w", encoding="utf-8") as fh:
        for y in labels:
            fh.write(f"{y}\n")
    tokens = np.full(n, "none", dtype=object)
    tokens[train_mask] = "train"
    tokens[val_mask] = "val"
    tokens[test_mask] = "test"
    with open(out / "masks.tsv", "w", encoding="utf-8") as fh:
        for t in tokens:
            fh.write(f"{t}\n")
    return out


def convert(src_dir, name: str, out_dir) -> Path:
    """Convert one dataset from src_dir into a bundle at out_dir."""
    source = load_source(src_dir, name)
    parts = assemble(source)
    return write_bundle_files(out_dir, name, *parts)
