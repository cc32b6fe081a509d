"""Training loop: phases, reductions, determinism, evaluation."""

import numpy as np
import pytest

from unionnet.gcn import TrainHyper, forward, glorot_init
from unionnet.graph import WalkConfig, normalize_adjacency
from unionnet.losses import standard_ce_loss
from unionnet.training import (METHODS, TrainConfig, TrainingDiverged,
                               evaluate, micro_f1, train)

from conftest import random_graph, toy_graph


def small_graph(seed=0, n=24, m=3):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, p=0.3, m=m, d=4)
    return g, normalize_adjacency(g)


def fast_cfg(method="unionnet", **kw):
    defaults = dict(
        method=method,
        walk=WalkConfig(3, 3, seed=5),
        hyper=TrainHyper(hidden=8),
        epochs=12,
        pretrain_epochs=4,
        seed=9,
    )
    defaults.update(kw)
    return TrainConfig(**defaults)


class TestMicroF1:
    def test_all_correct(self):
        assert micro_f1([0, 1, 2], [0, 1, 2]) == 1.0

    def test_single_wrong_class_balanced(self):
        assert micro_f1([0, 0, 1, 1], [1, 1, 1, 1]) == 0.5

    def test_matches_confusion_matrix_oracle(self):
        rng = np.random.default_rng(0)
        y = rng.integers(0, 4, size=200)
        p = rng.integers(0, 4, size=200)
        conf = np.zeros((4, 4), dtype=int)
        for a, b in zip(y, p):
            conf[a, b] += 1
        tp = np.trace(conf)
        fp = conf.sum() - tp          # every error is one FP and one FN
        oracle = tp / (tp + 0.5 * (fp + fp))
        assert micro_f1(y, p) == pytest.approx(oracle, abs=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            micro_f1([], [])


class TestEvaluate:
    def test_masked_accuracy(self):
        g, adj = small_graph(1)
        params = glorot_init(g.d, 8, g.m, np.random.default_rng(0))
        score = evaluate(params, g, adj, g.test_mask)
        state = forward(adj, g.features, params)
        preds = state.probs.value.argmax(axis=1)
        expect = np.mean(preds[g.test_mask] == g.labels[g.test_mask])
        assert score == pytest.approx(expect)

    def test_empty_mask_rejected(self):
        g, adj = small_graph(2)
        params = glorot_init(g.d, 8, g.m, np.random.default_rng(0))
        with pytest.raises(ValueError):
            evaluate(params, g, adj, np.zeros(g.n, dtype=bool))


class TestConfigValidation:
    def test_unknown_method(self):
        with pytest.raises(ValueError):
            fast_cfg(method="co_teaching")

    def test_alpha_out_of_range(self):
        with pytest.raises(ValueError):
            fast_cfg(alpha=1.5)

    def test_beta_negative(self):
        with pytest.raises(ValueError):
            fast_cfg(beta=-0.1)

    def test_pretrain_not_below_epochs(self):
        with pytest.raises(ValueError):
            fast_cfg(epochs=5, pretrain_epochs=5)

    def test_gcn_ce_ignores_pretrain_bound(self):
        cfg = fast_cfg(method="gcn_ce", epochs=5, pretrain_epochs=100)
        assert cfg.epochs == 5


class TestTrainLoop:
    def test_deterministic_runs_identical_logs(self):
        g, adj = small_graph(3)
        cfg = fast_cfg()
        labels = g.labels
        r1 = train(g, labels, cfg, adj=adj)
        r2 = train(g, labels, cfg, adj=adj)
        assert r1.log_csv() == r2.log_csv()
        assert np.array_equal(r1.params.w0, r2.params.w0)

    def test_pretrain_phase_is_exact_standard_ce(self):
        g, adj = small_graph(4)
        cfg = fast_cfg(epochs=6, pretrain_epochs=5)
        run = train(g, g.labels, cfg, adj=adj)
        # replay the same stream: init draws, then per-epoch dropout draws
        rng = np.random.default_rng(cfg.seed)
        params = glorot_init(g.d, cfg.hyper.hidden, g.m, rng)
        idx = np.flatnonzero(g.train_mask)
        state = forward(adj, g.features, params, dropout=cfg.hyper.dropout, rng=rng)
        ce = standard_ce_loss(state.probs, idx, g.labels[idx])
        rec = run.history[0]
        assert rec.loss_total == pytest.approx(float(ce.value), abs=1e-12)
        assert rec.loss_jr == rec.loss_jc == rec.loss_jp == 0.0

    def test_unionnet_alpha0_beta0_equals_reweight_only(self):
        g, adj = small_graph(5)
        base = fast_cfg(method="unionnet", alpha=0.0, beta=0.0, epochs=14,
                        pretrain_epochs=3)
        ablated = fast_cfg(method="unionnet_r", alpha=0.7, beta=2.0, epochs=14,
                           pretrain_epochs=3)
        r_full = train(g, g.labels, base, adj=adj)
        r_ablate = train(g, g.labels, ablated, adj=adj)
        for a, b in zip(r_full.history, r_ablate.history):
            assert abs(a.loss_total - b.loss_total) <= 1e-9

    def test_unionnet_rc_drops_prior_term(self):
        g, adj = small_graph(6)
        cfg = fast_cfg(method="unionnet_rc", alpha=0.5, beta=5.0, epochs=8,
                       pretrain_epochs=2)
        run = train(g, g.labels, cfg, adj=adj)
        joint = run.history[-1]
        assert joint.loss_total == pytest.approx(
            0.5 * joint.loss_jr + 0.5 * joint.loss_jc, abs=1e-9)

    def test_unionnet_full_combination(self):
        g, adj = small_graph(7)
        cfg = fast_cfg(method="unionnet", alpha=0.3, beta=1.5, epochs=8,
                       pretrain_epochs=2)
        run = train(g, g.labels, cfg, adj=adj)
        joint = run.history[-1]
        assert joint.loss_total == pytest.approx(
            0.7 * joint.loss_jr + 0.3 * joint.loss_jc + 1.5 * joint.loss_jp,
            abs=1e-9)

    def test_best_epoch_reports_matching_test_score(self):
        g, adj = small_graph(8)
        run = train(g, g.labels, fast_cfg(epochs=10), adj=adj)
        best = max(run.history, key=lambda r: r.val_f1)
        assert run.best_val_f1 == best.val_f1
        assert run.test_f1 == run.history[run.best_epoch].test_f1

    def test_gce_runs_single_phase(self):
        g, adj = small_graph(9)
        run = train(g, g.labels, fast_cfg(method="gce", epochs=6), adj=adj)
        assert all(r.loss_jr == 0.0 for r in run.history)

    def test_early_stopping_patience(self):
        g, adj = small_graph(10)
        cfg = fast_cfg(method="gcn_ce", epochs=60, patience=4)
        run = train(g, g.labels, cfg, adj=adj)
        assert len(run.history) < 60
        assert len(run.history) >= run.best_epoch + 4

    def test_csv_log_streaming(self, tmp_path):
        g, adj = small_graph(11)
        path = tmp_path / "log.csv"
        run = train(g, g.labels, fast_cfg(epochs=6), adj=adj, log_path=path)
        assert path.read_text() == run.log_csv()
        header = path.read_text().splitlines()[0]
        assert header == "epoch,loss_jr,loss_jc,loss_jp,loss_total,train_f1,val_f1,test_f1"

    def test_diagnostics_dumped_per_joint_epoch(self, tmp_path):
        g, adj = small_graph(12)
        cfg = fast_cfg(epochs=7, pretrain_epochs=4)
        train(g, g.labels, cfg, adj=adj, diagnostics_dir=tmp_path)
        files = sorted(p.name for p in tmp_path.glob("epoch_*.tsv"))
        assert files == ["epoch_0004.tsv", "epoch_0005.tsv", "epoch_0006.tsv"]

    def test_divergence_detected(self):
        g, adj = small_graph(13)
        cfg = fast_cfg(method="gcn_ce", epochs=30,
                       hyper=TrainHyper(lr=1e9, hidden=6))
        with np.errstate(all="ignore"), \
                pytest.raises((TrainingDiverged, ValueError, FloatingPointError)):
            train(g, g.labels, cfg, adj=adj)

    def test_empty_masks_rejected(self):
        g = toy_graph(5, [[0, 1], [1, 2]], m=2, labels=[0, 1, 0, 1, 0],
                      train=[0, 1])
        with pytest.raises(ValueError, match="val"):
            train(g, g.labels, fast_cfg(epochs=3, pretrain_epochs=1))

    def test_noisy_labels_only_read_on_train_mask(self):
        g, adj = small_graph(14)
        labels = g.labels.copy()
        labels[~g.train_mask] = 0     # poison off-train entries
        r1 = train(g, g.labels, fast_cfg(method="gcn_ce", epochs=5), adj=adj)
        # train f1 is measured against the provided labels, so compare losses only
        r2 = train(g, labels, fast_cfg(method="gcn_ce", epochs=5), adj=adj)
        assert [a.loss_total for a in r1.history] == [b.loss_total for b in r2.history]
        assert [a.val_f1 for a in r1.history] == [b.val_f1 for b in r2.history]


class TestMethodRegistry:
    @pytest.mark.parametrize("method", METHODS)
    def test_every_method_trains(self, method):
        g, adj = small_graph(15)
        run = train(g, g.labels, fast_cfg(method=method, epochs=6), adj=adj)
        assert len(run.history) == 6
        assert np.isfinite(run.test_f1)


class TestCleanDataRegressionPin:
    def test_gcn_ce_clean_sbm_200_epochs(self, sbm600):
        # regression pin from the first verified build: clean-label GCN must
        # clear 0.85 test micro-F1 on the pinned fixture within 200 epochs
        graph, adj = sbm600
        cfg = TrainConfig(method="gcn_ce", epochs=200, pretrain_epochs=0,
                          walk=WalkConfig(4, 10, seed=0), seed=0)
        run = train(graph, graph.labels, cfg, adj=adj)
        assert run.test_f1 > 0.85


class TestWorkScaling:
    def test_context_work_scales_with_walk_config(self):
        # the per-epoch aggregation work is |L| * walks * walk_length draws;
        # the collected context grows exactly with the config on a
        # self-return-free fixture (anchor exclusion removes nothing)
        from unionnet.graph import collect_context
        g = toy_graph(7, [[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 6],
                          [6, 1]])  # anchor 0 hangs off a cycle
        sizes = {}
        for length, walks in [(4, 5), (8, 5), (4, 10)]:
            ctx = collect_context(g, 0, WalkConfig(length, walks),
                                  np.random.default_rng(0))
            sizes[length, walks] = ctx.size
            assert ctx.size <= length * walks
        # the cycle keeps walks away from node 0 except via node 1; sizes
        # stay proportional to the sampled step budget
        assert sizes[8, 5] > sizes[4, 5]
        assert sizes[4, 10] > sizes[4, 5]
