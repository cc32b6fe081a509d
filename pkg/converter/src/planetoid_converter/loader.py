"""Parse the eight per-dataset files of the binary Planetoid distribution.

Per dataset `name`, the directory holds ind.<name>.{x,tx,allx,y,ty,ally,
graph,test.index}: pickled scipy sparse feature shards (float32 CSR),
pickled one-hot label arrays, a pickled adjacency dict, and a plain-text
list of test node indices. The pickles are Python-2 era and need
latin1 decoding.
"""

from __future__ import annotations

import pickle
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

SHARD_NAMES = ("x", "y", "tx", "ty", "allx", "ally", "graph", "test.index")
DATASETS = ("cora", "citeseer", "pubmed")


class ConverterError(Exception):
    """Base class for conversion failures."""


class MissingShard(ConverterError):
    pass


class CorruptShard(ConverterError):
    pass


@dataclass(frozen=True)
class PlanetoidSource:
    """In-memory view of one dataset's eight distribution files."""

    name: str
    x: sp.csr_matrix            # labeled-train features
    y: np.ndarray               # labeled-train one-hot labels
    tx: sp.csr_matrix           # test features (row order per test_index)
    ty: np.ndarray
    allx: sp.csr_matrix         # all non-test features
    ally: np.ndarray
    graph: dict                 # node id -> list of neighbor ids
    test_index: np.ndarray      # node ids of the test rows

    @property
    def n(self) -> int:
        return len(self.graph)


def _load_pickle(path: Path):
    try:
        with open(path, "rb") as fh:
            return pickle.load(fh, encoding="latin1")
    except Exception as exc:
        raise CorruptShard(f"cannot unpickle {path}: {exc}") from exc


def parse_index_file(path: Path) -> np.ndarray:
    try:
        lines = path.read_text(encoding="utf-8").split()
        return np.array([int(v) for v in lines], dtype=np.int64)
    except ValueError as exc:
        raise CorruptShard(f"non-integer entry in {path}") from exc


def load_source(src_dir, name: str) -> PlanetoidSource:
    """Read and sanity-check the eight files for dataset `name`."""
    src = Path(src_dir)
    paths = {ext: src / f"ind.{name}.{ext}" for ext in SHARD_NAMES}
    for ext, path in paths.items():
        if not path.is_file():
            raise MissingShard(f"missing distribution file: {path}")

    blobs = {}
    for ext in ("x", "y", "tx", "ty", "allx", "ally", "graph"):
        blobs[ext] = _load_pickle(paths[ext])
    test_index = parse_index_file(paths["test.index"])

    for ext in ("x", "tx", "allx"):
        if not sp.issparse(blobs[ext]):
            raise CorruptShard(f"ind.{name}.{ext} is not a sparse matrix")
        blobs[ext] = blobs[ext].tocsr()
    for ext in ("y", "ty", "ally"):
        blobs[ext] = np.asarray(blobs[ext])
        if blobs[ext].ndim != 2:
            raise CorruptShard(f"ind.{name}.{ext} is not a 2-d one-hot array")
    if not isinstance(blobs["graph"], dict):
        raise CorruptShard(f"ind.{name}.graph is not an adjacency dict")

    n = len(blobs["graph"])
    if test_index.size and (test_index.min() < 0 or test_index.max() >= n):
        raise CorruptShard(
            f"test indices outside [0, {n}) in ind.{name}.test.index")
    if blobs["x"].shape[0] != blobs["y"].shape[0]:
        raise CorruptShard(f"ind.{name}.x and .y row counts disagree")
    if blobs["tx"].shape[0] != blobs["ty"].shape[0]:
        raise CorruptShard(f"ind.{name}.tx and .ty row counts disagree")
    if blobs["allx"].shape[0] != blobs["ally"].shape[0]:
        raise CorruptShard(f"ind.{name}.allx and .ally row counts disagree")

    return PlanetoidSource(name=name, x=blobs["x"], y=blobs["y"],
                           tx=blobs["tx"], ty=blobs["ty"], allx=blobs["allx"],
                           ally=blobs["ally"], graph=blobs["graph"],
                           test_index=test_index)
