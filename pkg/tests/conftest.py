"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from unionnet.data import SbmSpec, generate_sbm
from unionnet.gcn import GcnParams
from unionnet.graph import Graph, normalize_adjacency

# the pinned fixture for the synthetic robustness regression
ACCEPTANCE_SBM = SbmSpec(blocks=3, nodes_per_block=200, p_in=0.05, p_out=0.005,
                         feature_dim=64, feature_signal=1.75, seed=11)


def toy_graph(n, edges, m=2, labels=None, d=2, train=None, val=None, test=None,
              features=None, seed=0):
    """Small hand-specified graph; masks default to empty."""
    rng = np.random.default_rng(seed)
    if features is None:
        features = rng.standard_normal((n, d))
    if labels is None:
        labels = rng.integers(0, m, size=n)
    def mask(ids):
        out = np.zeros(n, dtype=bool)
        if ids is not None:
            out[np.asarray(ids, dtype=int)] = True
        return out
    return Graph(features=np.asarray(features, dtype=np.float64),
                 labels=np.asarray(labels, dtype=np.int64), m=m,
                 edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
                 train_mask=mask(train), val_mask=mask(val), test_mask=mask(test))


def random_graph(rng, n, p=0.4, m=3, d=4, n_train=None):
    """Random Erdos-Renyi style graph with every node labeled, some trained."""
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.shape) < p
    edges = np.column_stack([iu[keep], ju[keep]])
    n_train = max(2, n // 3) if n_train is None else n_train
    perm = rng.permutation(n)
    return toy_graph(
        n, edges, m=m, d=d,
        labels=rng.integers(0, m, size=n),
        features=rng.standard_normal((n, d)),
        train=perm[:n_train],
        val=perm[n_train:n_train + max(1, n // 4)],
        test=perm[n_train + max(1, n // 4):n_train + max(2, n // 2)],
    )


def dense_normalized_adjacency(n, edges) -> np.ndarray:
    """Dense-arithmetic oracle for the symmetric normalization."""
    a = np.zeros((n, n))
    for i, j in np.asarray(edges).reshape(-1, 2):
        a[i, j] = 1.0
        a[j, i] = 1.0
    a = a + np.eye(n)
    deg = a.sum(axis=1)
    dinv = np.diag(1.0 / np.sqrt(deg))
    return dinv @ a @ dinv


def power_iteration_radius(mat: np.ndarray, iters=2000, seed=0) -> float:
    """Spectral radius estimate of a symmetric matrix by power iteration."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(mat.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = mat @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        v = w / norm
        lam = norm
    return float(lam)


def fd_gradients(loss_fn, params: GcnParams, eps=1e-5):
    """Central finite differences of loss_fn over every parameter entry."""
    grads = []
    mats = {"w0": params.w0, "w1": params.w1}
    for name in ("w0", "w1"):
        w = mats[name]
        gw = np.zeros_like(w)
        for idx in np.ndindex(*w.shape):
            for sign in (+1.0, -1.0):
                shifted = {k: v.copy() for k, v in mats.items()}
                shifted[name][idx] += sign * eps
                gw[idx] += sign * loss_fn(GcnParams(**shifted))
            gw[idx] /= 2.0 * eps
        grads.append(gw)
    return tuple(grads)


def max_rel_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Relative error with an absolute floor for near-zero gradient entries."""
    denom = np.maximum(np.abs(numeric), 1e-2)
    return float(np.max(np.abs(analytic - numeric) / denom))


def aggregate_oracle(embeddings, member_ids, member_labels, anchor, given_label, m):
    """Brute-force extended-precision aggregation (plain exp / normalize)."""
    from mpmath import exp, mp, mpf
    mp.dps = 50
    anchor_h = [mpf(float(x)) for x in embeddings[anchor]]
    weights = []
    for i in member_ids:
        score = sum(mpf(float(x)) * a for x, a in zip(embeddings[i], anchor_h))
        weights.append(exp(score))
    total = sum(weights)
    dist = [mpf(0)] * m
    for w, lbl in zip(weights, member_labels):
        dist[int(lbl)] += w / total
    floats = np.array([float(x) for x in dist])
    y_c = int(np.argmax(floats))
    return floats, float(dist[given_label]), y_c, float(floats[y_c])


@pytest.fixture(scope="session")
def sbm600():
    """The 600-node acceptance fixture graph with its normalized adjacency."""
    graph = generate_sbm(ACCEPTANCE_SBM)
    return graph, normalize_adjacency(graph)
