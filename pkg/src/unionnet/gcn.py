"""Two-layer GCN: parameters, forward pass, and parameter checkpointing.

forward builds the autodiff graph
    H1     = relu(A~ @ dropout(X) @ W0)
    logits = A~ @ dropout(H1) @ W1
    probs  = row_softmax(logits)
so any scalar composed from probs backpropagates into W0/W1. Eval mode
(dropout=0) is a deterministic pure function of (A~, X, params).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .graph import NormalizedAdjacency


@dataclass(frozen=True)
class TrainHyper:
    """Optimizer and backbone hyperparameters."""

    lr: float = 0.01
    weight_decay: float = 5e-4
    dropout: float = 0.5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    hidden: int = 16

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.hidden < 1:
            raise ValueError("hidden width must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")


@dataclass(frozen=True)
class GcnParams:
    w0: np.ndarray          # d x h
    w1: np.ndarray          # h x m

    def __post_init__(self):
        if not (np.all(np.isfinite(self.w0)) and np.all(np.isfinite(self.w1))):
            raise ValueError("parameters contain non-finite entries")
        if self.w0.shape[1] != self.w1.shape[0]:
            raise ValueError(f"layer shapes disagree: {self.w0.shape} vs {self.w1.shape}")

    def copy(self) -> "GcnParams":
        return GcnParams(self.w0.copy(), self.w1.copy())


def glorot_init(d: int, hidden: int, m: int, rng: np.random.Generator) -> GcnParams:
    """Glorot-uniform W0 (d x hidden) and W1 (hidden x m)."""
    a0 = np.sqrt(6.0 / (d + hidden))
    a1 = np.sqrt(6.0 / (hidden + m))
    return GcnParams(
        w0=rng.uniform(-a0, a0, size=(d, hidden)),
        w1=rng.uniform(-a1, a1, size=(hidden, m)),
    )


@dataclass
class ForwardState:
    """Graph nodes of one forward pass plus the parameter leaves."""

    w0: ad.Tensor
    w1: ad.Tensor
    h1: ad.Tensor
    logits: ad.Tensor
    probs: ad.Tensor
    dropout_masks: tuple[np.ndarray, ...] = ()   # scaled keep masks, train mode only

    @property
    def embeddings(self) -> np.ndarray:
        """Node representations used for label aggregation (post-ReLU hidden layer)."""
        return self.h1.value

    def grads(self) -> tuple[np.ndarray, np.ndarray]:
        """(dW0, dW1) after a backward pass; zeros where no gradient flowed."""
        g0 = self.w0.grad if self.w0.grad is not None else np.zeros_like(self.w0.value)
        g1 = self.w1.grad if self.w1.grad is not None else np.zeros_like(self.w1.value)
        return g0, g1


def forward(adj: NormalizedAdjacency, features: np.ndarray, params: GcnParams,
            dropout: float = 0.0, rng: np.random.Generator | None = None) -> ForwardState:
    """Run the two-layer GCN; dropout > 0 requires an rng (train mode)."""
    if not np.all(np.isfinite(features)):
        raise ValueError("features contain non-finite values")
    if dropout > 0.0 and rng is None:
        raise ValueError("train-mode forward (dropout > 0) needs an rng")
    w0 = ad.parameter(params.w0)
    w1 = ad.parameter(params.w1)
    x = ad.constant(features)
    masks = []
    if dropout > 0.0:
        masks.append(ad.dropout_mask(features.shape, dropout, rng))
        x = ad.hadamard(x, masks[0])
    h1 = ad.relu(ad.spmm(adj.csr, ad.matmul(x, w0)))
    h1d = h1
    if dropout > 0.0:
        masks.append(ad.dropout_mask(h1.value.shape, dropout, rng))
        h1d = ad.hadamard(h1, masks[1])
    logits = ad.spmm(adj.csr, ad.matmul(h1d, w1))
    probs = ad.row_softmax(logits)
    return ForwardState(w0=w0, w1=w1, h1=h1, logits=logits, probs=probs,
                        dropout_masks=tuple(masks))


def save_params(params: GcnParams, path) -> Path:
    """Checkpoint W0/W1 to an .npz with shapes in the headers."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    np.savez(out, w0=params.w0, w1=params.w1)
    return out


def load_params(path) -> GcnParams:
    with np.load(Path(path)) as npz:
        return GcnParams(w0=npz["w0"].copy(), w1=npz["w1"].copy())
