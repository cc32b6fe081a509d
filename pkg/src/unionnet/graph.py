"""Graph data model, symmetric adjacency normalization, and random-walk sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class WalkConfig:
    """Random-walk sampling parameters: steps per walk, walks per anchor, seed."""

    walk_length: int
    walks_per_node: int
    seed: int = 0

    def __post_init__(self):
        if self.walk_length < 1:
            raise ValueError(f"walk_length must be >= 1, got {self.walk_length}")
        if self.walks_per_node < 1:
            raise ValueError(f"walks_per_node must be >= 1, got {self.walks_per_node}")


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph with dense node features and masked labels.

    ``edges`` is canonicalized on construction: one row per undirected pair,
    i < j, sorted, duplicates merged. Self-loops are rejected (loaders strip
    them before constructing). Arrays are frozen read-only.
    """

    features: np.ndarray        # n x d float64
    labels: np.ndarray          # n int64, class id in [0, m) (-1 allowed off-mask)
    m: int                      # class count
    edges: np.ndarray           # E x 2 int64, canonical
    train_mask: np.ndarray      # n bool
    val_mask: np.ndarray
    test_mask: np.ndarray
    name: str = ""
    # neighbor CSR over the stored (self-loop-free) edges, built in __post_init__
    nbr_indptr: np.ndarray = field(init=False, repr=False, compare=False)
    nbr_indices: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        masks = {
            "train_mask": np.asarray(self.train_mask, dtype=bool),
            "val_mask": np.asarray(self.val_mask, dtype=bool),
            "test_mask": np.asarray(self.test_mask, dtype=bool),
        }

        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise ValueError(f"features must be a non-empty n x d matrix, got shape {features.shape}")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain non-finite values")
        n = features.shape[0]
        if self.m < 1:
            raise ValueError(f"class count must be positive, got {self.m}")
        if labels.shape != (n,):
            raise ValueError(f"labels must have shape ({n},), got {labels.shape}")
        for key, mask in masks.items():
            if mask.shape != (n,):
                raise ValueError(f"{key} must have shape ({n},), got {mask.shape}")
        overlap = (masks["train_mask"].astype(int) + masks["val_mask"]
                   + masks["test_mask"])
        if overlap.max(initial=0) > 1:
            raise ValueError("train/val/test masks overlap")
        masked = masks["train_mask"] | masks["val_mask"] | masks["test_mask"]
        bad = masked & ((labels < 0) | (labels >= self.m))
        if bad.any():
            raise ValueError(f"{int(bad.sum())} masked nodes carry labels outside [0, {self.m})")

        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise IndexError(f"edge endpoint outside [0, {n})")
            if (edges[:, 0] == edges[:, 1]).any():
                raise ValueError("self-loops are not allowed in stored edges")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.unique(np.column_stack([lo, hi]), axis=0)
        else:
            edges = np.empty((0, 2), dtype=np.int64)

        # symmetric neighbor CSR
        both = np.concatenate([edges, edges[:, ::-1]]) if edges.size else edges
        order = np.lexsort((both[:, 1], both[:, 0])) if both.size else np.array([], dtype=np.intp)
        both = both[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        if both.size:
            np.add.at(indptr, both[:, 0] + 1, 1)
        indptr = np.cumsum(indptr)
        indices = both[:, 1].copy() if both.size else np.empty(0, dtype=np.int64)

        for arr in (features, labels, edges, indptr, indices, *masks.values()):
            arr.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "edges", edges)
        for key, mask in masks.items():
            object.__setattr__(self, key, mask)
        object.__setattr__(self, "nbr_indptr", indptr)
        object.__setattr__(self, "nbr_indices", indices)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.nbr_indptr)

    def neighbors(self, node: int) -> np.ndarray:
        return self.nbr_indices[self.nbr_indptr[node]:self.nbr_indptr[node + 1]]


@dataclass(frozen=True)
class NormalizedAdjacency:
    """Symmetrically normalized adjacency with self-loops, in CSR form."""

    csr: sp.csr_matrix

    @property
    def n(self) -> int:
        return self.csr.shape[0]

    @property
    def indptr(self) -> np.ndarray:
        return self.csr.indptr

    @property
    def indices(self) -> np.ndarray:
        return self.csr.indices

    @property
    def values(self) -> np.ndarray:
        return self.csr.data

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()


def normalize_adjacency(graph: Graph) -> NormalizedAdjacency:
    """Degree-normalized adjacency with self-loops added once.

    With A the stored adjacency and D~ the degree matrix of A + I, returns
    D~^{-1/2} (A + I) D~^{-1/2}. Symmetric, strictly positive diagonal;
    isolated nodes get the 1.0 self-loop entry.
    """
    n = graph.n
    e = graph.edges
    rows = np.concatenate([e[:, 0], e[:, 1], np.arange(n)])
    cols = np.concatenate([e[:, 1], e[:, 0], np.arange(n)])
    deg = np.bincount(rows, minlength=n).astype(np.float64)
    inv_sqrt = 1.0 / np.sqrt(deg)
    vals = inv_sqrt[rows] * inv_sqrt[cols]
    csr = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    csr.sum_duplicates()
    csr.sort_indices()
    return NormalizedAdjacency(csr)


def _walk_batch(graph: Graph, start: int, n_walks: int, length: int,
                rng: np.random.Generator) -> np.ndarray:
    """Run n_walks uniform random walks of `length` steps from `start`, in lockstep.

    Returns an (n_walks, length) array of visited node ids; the start node is
    not emitted (walks begin at a sampled neighbor of `start`). An isolated
    start yields an (n_walks, 0) array. Mid-walk dead ends cannot happen on an
    undirected graph: every visited node has at least the edge it came by.
    """
    if not 0 <= start < graph.n:
        raise IndexError(f"start node {start} outside [0, {graph.n})")
    indptr, indices = graph.nbr_indptr, graph.nbr_indices
    deg = graph.degrees
    if deg[start] == 0:
        return np.empty((n_walks, 0), dtype=np.int64)
    out = np.empty((length, n_walks), dtype=np.int64)
    first = graph.neighbors(start)
    cur = first[rng.integers(0, deg[start], size=n_walks)]
    out[0] = cur
    for t in range(1, length):
        offs = rng.integers(0, deg[cur])
        cur = indices[indptr[cur] + offs]
        out[t] = cur
    return out.T


def random_walk(graph: Graph, start: int, cfg: WalkConfig,
                rng: np.random.Generator) -> np.ndarray:
    """One uniform random walk of cfg.walk_length steps from `start`.

    The start node itself is not emitted; it may reappear mid-walk. Isolated
    start returns an empty array.
    """
    return _walk_batch(graph, start, 1, cfg.walk_length, rng)[0]


def collect_context(graph: Graph, anchor: int, cfg: WalkConfig,
                    rng: np.random.Generator) -> np.ndarray:
    """Multiset of context node ids from cfg.walks_per_node walks off `anchor`.

    Walk-major concatenation of all walks with every occurrence of the anchor
    itself removed; duplicates are kept (visit frequency acts as a proximity
    weight). Size is at most walk_length * walks_per_node.
    """
    walks = _walk_batch(graph, anchor, cfg.walks_per_node, cfg.walk_length, rng)
    flat = walks.reshape(-1)
    return flat[flat != anchor]
