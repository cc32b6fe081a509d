"""Conversion correctness on synthesized distribution files."""

import pickle

import numpy as np
import pytest
import scipy.sparse as sp

from planetoid_converter import (ConverterError, CorruptShard, MissingShard,
                                 convert, load_source)
from planetoid_converter.cli import main


def onehot(ids, m):
    out = np.zeros((len(ids), m), dtype=np.int32)
    for k, c in enumerate(ids):
        out[k, c] = 1
    return out


def write_fixture(src, name="cora", gap=False):
    """Tiny 10-node dataset in the eight-file distribution layout.

    Nodes 0..6 live in allx (0 and 1 labeled for training), nodes 7..9 are
    the test shard, listed out of order in test.index to exercise the row
    permutation. With gap=True node 8 is missing from the shard entirely
    (the Citeseer quirk).
    """
    src.mkdir(parents=True, exist_ok=True)
    d, m = 4, 3
    # distinguishing feature per node: one-hot-ish row with value node_id+1
    allx = sp.lil_matrix((7, d))
    for i in range(7):
        allx[i, i % d] = float(i + 1)
    ally = onehot([0, 1, 2, 0, 1, 2, 0], m)
    x = allx[:2].tocsr()
    y = ally[:2]

    if gap:
        test_index = [9, 7]          # node 8 missing
        rows = [9, 7]
    else:
        test_index = [8, 7, 9]       # shuffled on purpose
        rows = [8, 7, 9]
    tx = sp.lil_matrix((len(rows), d))
    for k, node in enumerate(rows):
        tx[k, node % d] = float(node + 1)
    ty = onehot([node % m for node in rows], m)

    graph = {
        0: [1, 2], 1: [0], 2: [0, 3], 3: [2, 3], 4: [5],
        5: [4, 9], 6: [], 7: [0], 8: [2] if not gap else [], 9: [5],
    }
    # note: 3 has a self-loop; 7->0 is one-directional and must be symmetrized

    blobs = {"x": x, "y": y, "tx": tx.tocsr(), "ty": ty,
             "allx": allx.tocsr(), "ally": ally, "graph": graph}
    for ext, blob in blobs.items():
        with open(src / f"ind.{name}.{ext}", "wb") as fh:
            pickle.dump(blob, fh)
    (src / f"ind.{name}.test.index").write_text(
        "\n".join(str(i) for i in test_index) + "\n")
    return src


class TestLoadSource:
    def test_loads_fixture(self, tmp_path):
        src = write_fixture(tmp_path / "raw")
        source = load_source(src, "cora")
        assert source.n == 10
        assert source.x.shape == (2, 4)
        assert source.test_index.tolist() == [8, 7, 9]

    def test_missing_shard(self, tmp_path):
        src = write_fixture(tmp_path / "raw")
        (src / "ind.cora.ally").unlink()
        with pytest.raises(MissingShard):
            load_source(src, "cora")

    def test_corrupt_pickle(self, tmp_path):
        src = write_fixture(tmp_path / "raw")
        (src / "ind.cora.graph").write_bytes(b"not a pickle")
        with pytest.raises(CorruptShard):
            load_source(src, "cora")

    def test_test_index_out_of_range(self, tmp_path):
        src = write_fixture(tmp_path / "raw")
        (src / "ind.cora.test.index").write_text("7\n8\n99\n")
        with pytest.raises(CorruptShard):
            load_source(src, "cora")


class TestConvert:
    def test_bundle_files_written(self, tmp_path):
        src = write_fixture(tmp_path / "raw")
        out = convert(src, "cora", tmp_path / "bundle")
        for fname in ("meta.tsv", "edges.tsv", "features.tsv", "labels.tsv",
                      "masks.tsv"):
            assert (out / fname).is_file()
        assert (out / "meta.tsv").read_text() == "cora\t10\t4\t3\n"

    def test_test_rows_land_on_their_node_ids(self, tmp_path):
        src = write_fixture(tmp_path / "raw")
        out = convert(src, "cora", tmp_path / "bundle")
        rows = [line.split("\t") for line in
                (out / "features.tsv").read_text().splitlines()]
        # node i carries value i+1 at column i % 4, row-normalized to 1.0
        for node in range(10):
            values = [float(v) for v in rows[node]]
            assert values[node % 4] == pytest.approx(1.0)
            assert sum(values) == pytest.approx(1.0)

    def test_labels_and_masks(self, tmp_path):
        src = write_fixture(tmp_path / "raw")
        out = convert(src, "cora", tmp_path / "bundle")
        labels = [int(v) for v in (out / "labels.tsv").read_text().splitlines()]
        assert labels == [0, 1, 2, 0, 1, 2, 0, 7 % 3, 8 % 3, 9 % 3]
        masks = (out / "masks.tsv").read_text().splitlines()
        assert masks == ["train", "train", "val", "val", "val", "val", "val",
                         "test", "test", "test"]

    def test_edges_symmetrized_no_self_loops(self, tmp_path):
        src = write_fixture(tmp_path / "raw")
        out = convert(src, "cora", tmp_path / "bundle")
        edges = {tuple(map(int, line.split("\t")))
                 for line in (out / "edges.tsv").read_text().splitlines()}
        assert edges == {(0, 1), (0, 2), (2, 3), (4, 5), (5, 9), (0, 7), (2, 8)}

    def test_citeseer_style_gap_preserved_as_zero_row(self, tmp_path):
        src = write_fixture(tmp_path / "raw", gap=True)
        out = convert(src, "cora", tmp_path / "bundle")
        rows = (out / "features.tsv").read_text().splitlines()
        assert all(float(v) == 0.0 for v in rows[8].split("\t"))
        labels = [int(v) for v in (out / "labels.tsv").read_text().splitlines()]
        assert labels[8] == -1
        masks = (out / "masks.tsv").read_text().splitlines()
        assert masks[8] == "none"           # absent from test.index
        assert masks[7] == masks[9] == "test"

    def test_double_conversion_byte_identical(self, tmp_path):
        src = write_fixture(tmp_path / "raw")
        out1 = convert(src, "cora", tmp_path / "b1")
        out2 = convert(src, "cora", tmp_path / "b2")
        for fname in ("meta.tsv", "edges.tsv", "features.tsv", "labels.tsv",
                      "masks.tsv"):
            assert (out1 / fname).read_bytes() == (out2 / fname).read_bytes()

    def test_coverage_mismatch_rejected(self, tmp_path):
        src = write_fixture(tmp_path / "raw")
        # drop a row from allx: shards no longer cover the graph
        with open(src / "ind.cora.allx", "rb") as fh:
            allx = pickle.load(fh)
        with open(src / "ind.cora.allx", "wb") as fh:
            pickle.dump(allx[:6], fh)
        with open(src / "ind.cora.ally", "rb") as fh:
            ally = pickle.load(fh)
        with open(src / "ind.cora.ally", "wb") as fh:
            pickle.dump(ally[:6], fh)
        with pytest.raises(ConverterError):
            convert(src, "cora", tmp_path / "bundle")


class TestRoundTripWithPrimary:
    def test_load_bundle_accepts_converted_output(self, tmp_path):
        unionnet_data = pytest.importorskip("unionnet.data")
        src = write_fixture(tmp_path / "raw")
        out = convert(src, "cora", tmp_path / "bundle")
        g = unionnet_data.load_bundle(out)
        assert g.n == 10 and g.d == 4 and g.m == 3
        assert int(g.train_mask.sum()) == 2
        assert int(g.val_mask.sum()) == 5
        assert int(g.test_mask.sum()) == 3
        assert len(g.edges) == 7

    def test_gap_bundle_loads_cleanly(self, tmp_path):
        unionnet_data = pytest.importorskip("unionnet.data")
        src = write_fixture(tmp_path / "raw", gap=True)
        g = unionnet_data.load_bundle(convert(src, "cora", tmp_path / "bundle"))
        assert g.labels[8] == -1 and not g.test_mask[8]


class TestCli:
    def test_convert_verb(self, tmp_path, capsys):
        src = write_fixture(tmp_path / "raw")
        rc = main(["convert", "--dataset", "cora", "--src", str(src),
                   "--out", str(tmp_path / "bundle")])
        assert rc == 0
        assert "wrote cora bundle" in capsys.readouterr().out

    def test_convert_failure_exit_code(self, tmp_path):
        rc = main(["convert", "--dataset", "cora", "--src",
                   str(tmp_path / "nothing"), "--out", str(tmp_path / "o")])
        assert rc == 1
