"""Loss compositions over the autodiff op set.

All losses sum (not average) over the labeled nodes, and every per-node
weight (reweighting score, correction confidence, prior) enters as a
constant: gradients flow only through the predicted distributions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad


@dataclass(frozen=True)
class PriorDistribution:
    """Class frequencies among the (noisy) training labels."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 1 or (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("prior must be a probability vector")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_labels(cls, labels: np.ndarray, m: int) -> "PriorDistribution":
        counts = np.bincount(labels, minlength=m).astype(np.float64)
        if counts.sum() == 0:
            raise ValueError("cannot build a prior from zero labels")
        return cls(counts / counts.sum())


def weighted_cross_entropy(probs: ad.Tensor, nodes, labels, weights) -> ad.Tensor:
    """-sum_i weights[i] * log probs[nodes[i], labels[i]] with constant weights."""
    nodes = np.asarray(nodes, dtype=np.intp)
    labels = np.asarray(labels, dtype=np.intp)
    weights = np.asarray(weights, dtype=np.float64)
    if not (nodes.shape == labels.shape == weights.shape):
        raise ValueError("nodes, labels and weights must align")
    picked = ad.log(ad.pick(probs, nodes, labels))
    return ad.weighted_sum(picked, -weights)


def standard_ce_loss(probs: ad.Tensor, nodes, labels) -> ad.Tensor:
    """Plain cross entropy summed over the labeled nodes."""
    nodes = np.asarray(nodes, dtype=np.intp)
    if nodes.size == 0:
        raise ValueError("cross entropy over an empty labeled set is degenerate")
    return weighted_cross_entropy(probs, nodes, labels, np.ones(nodes.size))


def reweighted_loss(probs: ad.Tensor, nodes, labels, p_r) -> ad.Tensor:
    """Cross entropy with each labeled node scaled by its reweighting score."""
    return weighted_cross_entropy(probs, nodes, labels, p_r)


def correction_loss(probs: ad.Tensor, nodes, corrected_labels, p_c) -> ad.Tensor:
    """Cross entropy against corrected labels, scaled by correction confidence."""
    return weighted_cross_entropy(probs, nodes, corrected_labels, p_c)


def prior_kl_loss(probs: ad.Tensor, train_nodes, prior: PriorDistribution) -> ad.Tensor:
    """KL(prior || mean predicted distribution over the training nodes).

    sum_j p_j log(p_j / fbar_j) with fbar the row mean of probs over
    train_nodes; classes with p_j = 0 contribute nothing.
    """
    train_nodes = np.asarray(train_nodes, dtype=np.intp)
    if train_nodes.size == 0:
        raise ValueError("prior KL needs a non-empty training set")
    p = prior.p
    entropy = float(np.sum(np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)))
    fbar_log = ad.log(ad.row_mean(probs, train_nodes))
    cross = ad.weighted_sum(fbar_log, p)
    return ad.affine([cross], [-1.0], const=entropy)


def combined_loss(j_r: ad.Tensor, j_c: ad.Tensor, j_p: ad.Tensor,
                  alpha: float, beta: float) -> ad.Tensor:
    """(1 - alpha) * J_r + alpha * J_c + beta * J_p."""
    return ad.affine([j_r, j_c, j_p], [1.0 - alpha, alpha, beta])


def gce_loss(probs: ad.Tensor, nodes, labels, q: float) -> ad.Tensor:
    """Box-Cox generalized cross entropy: sum_i (1 - p_i^q) / q.

    Approaches plain cross entropy as q -> 0; q in (0, 1].
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"gce exponent must be in (0, 1], got {q}")
    nodes = np.asarray(nodes, dtype=np.intp)
    labels = np.asarray(labels, dtype=np.intp)
    powered = ad.powc(ad.pick(probs, nodes, labels), q)
    total = ad.weighted_sum(powered, np.ones(nodes.size))
    return ad.affine([total], [-1.0 / q], const=nodes.size / q)
