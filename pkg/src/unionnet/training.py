"""End-to-end training: cross-entropy pretraining, then the joint objective.

Per joint epoch: eval-mode forward gives embeddings and current predictions;
fresh random walks build per-anchor support sets; aggregation produces the
reweighting scores, corrected labels, and confidences (held constant for the
update); a train-mode forward composes the combined loss, whose gradients
(plus weight decay) feed one Adam step. Ablation methods reuse the same
pipeline with pinned coefficients so trajectories are comparable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .aggregation import aggregate_anchors, write_diagnostics
from .gcn import ForwardState, GcnParams, TrainHyper, forward, glorot_init
from .graph import Graph, NormalizedAdjacency, WalkConfig, normalize_adjacency
from .losses import (PriorDistribution, combined_loss, correction_loss,
                     gce_loss, prior_kl_loss, reweighted_loss,
                     standard_ce_loss)
from .optim import Adam

METHODS = ("gcn_ce", "unionnet", "unionnet_r", "unionnet_rc", "gce")
LOG_HEADER = "epoch,loss_jr,loss_jc,loss_jp,loss_total,train_f1,val_f1,test_f1"


class TrainingDiverged(RuntimeError):
    """Raised when the loss stops being finite; carries the epoch and loss."""


@dataclass(frozen=True)
class TrainConfig:
    method: str = "unionnet"
    alpha: float = 0.5
    beta: float = 1.0
    walk: WalkConfig = field(default_factory=lambda: WalkConfig(10, 10))
    hyper: TrainHyper = field(default_factory=TrainHyper)
    epochs: int = 400
    pretrain_epochs: int = 40
    patience: int | None = None
    gce_q: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.uses_aggregation and not 0 <= self.pretrain_epochs < self.epochs:
            raise ValueError("need 0 <= pretrain_epochs < epochs")
        if not 0.0 < self.gce_q <= 1.0:
            raise ValueError(f"gce_q must be in (0, 1], got {self.gce_q}")
        if self.patience is not None and self.patience < 1:
            raise ValueError("patience must be positive (or None to disable)")

    @property
    def uses_aggregation(self) -> bool:
        return self.method in ("unionnet", "unionnet_r", "unionnet_rc")

    @property
    def effective_alpha_beta(self) -> tuple[float, float]:
        """Coefficients actually applied in the joint phase."""
        if self.method == "unionnet_r":
            return 0.0, 0.0
        if self.method == "unionnet_rc":
            return self.alpha, 0.0
        return self.alpha, self.beta


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss_jr: float
    loss_jc: float
    loss_jp: float
    loss_total: float
    train_f1: float
    val_f1: float
    test_f1: float

    def csv_row(self) -> str:
        return (f"{self.epoch},{self.loss_jr!r},{self.loss_jc!r},{self.loss_jp!r},"
                f"{self.loss_total!r},{self.train_f1!r},{self.val_f1!r},{self.test_f1!r}")


@dataclass
class RunResult:
    history: list[EpochRecord]
    params: GcnParams            # snapshot at the best-validation epoch
    best_epoch: int
    best_val_f1: float
    test_f1: float               # test score at the best-validation epoch
    seed: int
    wall_time: float

    def log_csv(self) -> str:
        return "\n".join([LOG_HEADER, *(r.csv_row() for r in self.history)]) + "\n"

    def write_log(self, path) -> Path:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(self.log_csv(), encoding="utf-8")
        return out


def micro_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Micro-averaged F1; equals accuracy for single-label multiclass."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise ValueError("micro_f1 over an empty set")
    if y_true.shape != y_pred.shape:
        raise ValueError("prediction/label shape mismatch")
    return float(np.mean(y_true == y_pred))


def evaluate(params: GcnParams, graph: Graph, adj: NormalizedAdjacency,
             mask: np.ndarray) -> float:
    """Micro-F1 of argmax predictions over the masked nodes (clean labels)."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("evaluate over an empty mask")
    state = forward(adj, graph.features, params)
    preds = state.probs.value.argmax(axis=1)
    return micro_f1(graph.labels[mask], preds[mask])


def _phase_loss(cfg: TrainConfig, state: ForwardState, epoch: int,
                train_idx: np.ndarray, labels: np.ndarray,
                weights: tuple[np.ndarray, np.ndarray, np.ndarray] | None,
                prior: PriorDistribution) -> tuple[ad.Tensor, float, float, float]:
    """Loss tensor for this epoch plus the (jr, jc, jp) component values."""
    y_train = labels[train_idx]
    if cfg.method == "gce":
        return gce_loss(state.probs, train_idx, y_train, cfg.gce_q), 0.0, 0.0, 0.0
    if cfg.method == "gcn_ce" or epoch < cfg.pretrain_epochs:
        return standard_ce_loss(state.probs, train_idx, y_train), 0.0, 0.0, 0.0
    p_r, y_corr, p_c = weights
    jr = reweighted_loss(state.probs, train_idx, y_train, p_r)
    jc = correction_loss(state.probs, train_idx, y_corr, p_c)
    jp = prior_kl_loss(state.probs, train_idx, prior)
    alpha, beta = cfg.effective_alpha_beta
    total = combined_loss(jr, jc, jp, alpha, beta)
    return total, float(jr.value), float(jc.value), float(jp.value)


def train(graph: Graph, labels_noisy: np.ndarray, cfg: TrainConfig,
          adj: NormalizedAdjacency | None = None,
          log_path=None, diagnostics_dir=None) -> RunResult:
    """Run one training configuration to completion.

    labels_noisy is the full-length (possibly corrupted) label vector; only
    its train-mask entries are read. Deterministic for fixed inputs and
    seeds. log_path streams the per-epoch CSV; diagnostics_dir dumps the
    per-anchor aggregation TSVs.
    """
    start = time.perf_counter()
    if adj is None:
        adj = normalize_adjacency(graph)
    labels_noisy = np.asarray(labels_noisy, dtype=np.int64)
    train_idx = np.flatnonzero(graph.train_mask)
    if train_idx.size == 0:
        raise ValueError("training requires a non-empty train mask")
    if not graph.val_mask.any() or not graph.test_mask.any():
        raise ValueError("training requires non-empty val and test masks "
                         "(model selection runs on validation micro-F1)")
    prior = PriorDistribution.from_labels(labels_noisy[train_idx], graph.m)

    rng = np.random.default_rng(cfg.seed)          # init + dropout stream
    params = glorot_init(graph.d, cfg.hyper.hidden, graph.m, rng)
    optimizer = Adam(hyper=cfg.hyper)

    eval_state = forward(adj, graph.features, params)
    history: list[EpochRecord] = []
    best_epoch, best_val, best_test = -1, -np.inf, 0.0
    best_params = params.copy()
    since_best = 0

    log_fh = None
    if log_path is not None:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        log_fh = open(log_path, "w", encoding="utf-8")
        log_fh.write(LOG_HEADER + "\n")

    try:
        for epoch in range(cfg.epochs):
            weights = None
            if cfg.uses_aggregation and epoch >= cfg.pretrain_epochs:
                embeddings = eval_state.embeddings
                predictions = eval_state.probs.value.argmax(axis=1)
                walk_rng = np.random.default_rng((cfg.walk.seed, epoch))
                anchors, p_r, y_corr, p_c = aggregate_anchors(
                    graph, embeddings, labels_noisy, predictions, cfg.walk, walk_rng)
                weights = (p_r, y_corr, p_c)
                if diagnostics_dir is not None:
                    write_diagnostics(Path(diagnostics_dir) / f"epoch_{epoch:04d}.tsv",
                                      anchors, p_r, p_c, labels_noisy[anchors], y_corr)

            state = forward(adj, graph.features, params,
                            dropout=cfg.hyper.dropout, rng=rng)
            total, jr, jc, jp = _phase_loss(cfg, state, epoch, train_idx,
                                            labels_noisy, weights, prior)
            if not np.isfinite(total.value):
                raise TrainingDiverged(
                    f"non-finite loss {total.value} at epoch {epoch} "
                    f"(jr={jr}, jc={jc}, jp={jp})")
            ad.backward(total)
            g0, g1 = state.grads()
            wd = cfg.hyper.weight_decay
            params = optimizer.step(params, (g0 + wd * params.w0,
                                             g1 + wd * params.w1))

            eval_state = forward(adj, graph.features, params)
            preds = eval_state.probs.value.argmax(axis=1)
            train_f1 = micro_f1(labels_noisy[train_idx], preds[train_idx])
            val_f1 = micro_f1(graph.labels[graph.val_mask], preds[graph.val_mask])
            test_f1 = micro_f1(graph.labels[graph.test_mask], preds[graph.test_mask])

            record = EpochRecord(epoch, jr, jc, jp, float(total.value),
                                 train_f1, val_f1, test_f1)
            history.append(record)
            if log_fh is not None:
                log_fh.write(record.csv_row() + "\n")
                log_fh.flush()

            if val_f1 > best_val:
                best_epoch, best_val, best_test = epoch, val_f1, test_f1
                best_params = params.copy()
                since_best = 0
            else:
                since_best += 1
                if cfg.patience is not None and since_best >= cfg.patience:
                    break
    finally:
        if log_fh is not None:
            log_fh.close()

    return RunResult(
        history=history,
        params=best_params,
        best_epoch=best_epoch,
        best_val_f1=float(best_val),
        test_f1=float(best_test),
        seed=cfg.seed,
        wall_time=time.perf_counter() - start,
    )
