"""Training objectives for joint artifact classification and severity
estimation, with analytic gradients.

NumPy reference implementations; each loss comes with a closed-form
gradient so the implementations can be validated against finite
differences and reused in gradient-based fitting without a framework
dependency. The combined objective is

    total = cls + lambda_reg * reg + lambda_rank * rank + lambda_con * con
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LossWeights:
    lambda_reg: float = 1.0
    lambda_rank: float = 0.3
    lambda_con: float = 0.05
    margin: float = 0.5
    temperature: float = 0.07

    def __post_init__(self):
        if self.margin <= 0 or self.temperature <= 0:
            raise ValueError("margin and temperature must be positive")
        if min(self.lambda_reg, self.lambda_rank, self.lambda_con) < 0:
            raise ValueError("loss weights must be nonnegative")


DEFAULT_WEIGHTS = LossWeights()


def _check_logits(logits, labels):
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim == 1:
        logits = logits[None, :]
    if logits.ndim != 2:
        raise ValueError(f"logits must be (batch, classes), got {logits.shape}")
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    if labels.shape != (logits.shape[0],):
        raise ValueError(
            f"labels shape {labels.shape} does not match batch {logits.shape[0]}"
        )
    if labels.min() < 0 or labels.max() >= logits.shape[1]:
        raise ValueError("labels out of range")
    return logits, labels


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cross_entropy(logits, labels) -> float:
    """Mean negative log-likelihood of integer labels under the logits."""

    logits, labels = _check_logits(logits, labels)
    logp = _log_softmax(logits)
    return float(-logp[np.arange(labels.size), labels].mean())


def cross_entropy_grad(logits, labels) -> np.ndarray:
    """d cross_entropy / d logits, shape (batch, classes)."""

    logits, labels = _check_logits(logits, labels)
    probs = np.exp(_log_softmax(logits))
    probs[np.arange(labels.size), labels] -= 1.0
    return probs / labels.size


def smooth_l1(pred, target) -> float:
    """Mean Huber-style error: 0.5 e^2 inside |e| < 1, |e| - 0.5 outside."""

    pred = np.asarray(pred, dtype=np.float64).ravel()
    target = np.asarray(target, dtype=np.float64).ravel()
    if pred.size != target.size or pred.size == 0:
        raise ValueError("pred and target must be non-empty and equal length")
    err = pred - target
    abs_err = np.abs(err)
    per = np.where(abs_err < 1.0, 0.5 * err * err, abs_err - 0.5)
    return float(per.mean())


def smooth_l1_grad(pred, target) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64).ravel()
    target = np.asarray(target, dtype=np.float64).ravel()
    err = pred - target
    return np.where(np.abs(err) < 1.0, err, np.sign(err)) / pred.size


def _ordered_pairs(severities: np.ndarray) -> np.ndarray:
    i, j = np.nonzero(severities[:, None] > severities[None, :])
    return np.stack([i, j], axis=1)


def rank_loss(scores, severities, margin: float = DEFAULT_WEIGHTS.margin) -> float:
    """Pairwise margin ranking over severity-ordered pairs.

    For every pair with severity_i > severity_j, the predicted scores
    must satisfy score_i - score_j >= margin; the loss is the mean
    hinge over those pairs. With no ordered pairs (all severities
    equal) there is nothing to rank and the loss is 0.
    """

    scores = np.asarray(scores, dtype=np.float64).ravel()
    severities = np.asarray(severities, dtype=np.float64).ravel()
    if scores.size != severities.size or scores.size == 0:
        raise ValueError("scores and severities must be non-empty, equal length")
    pairs = _ordered_pairs(severities)
    if pairs.shape[0] == 0:
        warnings.warn("no severity-ordered pairs; rank loss is 0", stacklevel=2)
        return 0.0
    hinge = np.maximum(0.0, margin - (scores[pairs[:, 0]] - scores[pairs[:, 1]]))
    return float(hinge.mean())


def rank_loss_grad(
    scores, severities, margin: float = DEFAULT_WEIGHTS.margin
) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64).ravel()
    severities = np.asarray(severities, dtype=np.float64).ravel()
    grad = np.zeros_like(scores)
    pairs = _ordered_pairs(severities)
    if pairs.shape[0] == 0:
        return grad
    active = margin - (scores[pairs[:, 0]] - scores[pairs[:, 1]]) > 0.0
    scale = 1.0 / pairs.shape[0]
    np.add.at(grad, pairs[active, 0], -scale)
    np.add.at(grad, pairs[active, 1], scale)
    return grad


def _label_codes(labels, batch: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim == 2:
        keys = [tuple(row) for row in labels]
    elif labels.ndim == 1:
        keys = list(labels)
    else:
        raise ValueError("labels must be 1-D, or 2-D with one row per sample")
    if len(keys) != batch:
        raise ValueError(f"expected {batch} labels, got {len(keys)}")
    codes: dict = {}
    return np.array([codes.setdefault(k, len(codes)) for k in keys], dtype=np.int64)


def _supcon_parts(features, labels, temperature):
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("features must be (batch >= 2, dim)")
    codes = _label_codes(labels, x.shape[0])
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms < 1e-12):
        raise ValueError("zero feature rows cannot be normalized")
    z = x / norms[:, None]
    sim = (z @ z.T) / temperature
    np.fill_diagonal(sim, -np.inf)  # anchors never contrast with themselves
    positives = (codes[:, None] == codes[None, :]) & ~np.eye(
        codes.size, dtype=bool
    )
    return x, z, norms, sim, positives


def supcon_loss(
    features, labels, temperature: float = DEFAULT_WEIGHTS.temperature
) -> float:
    """Supervised contrastive loss on L2-normalized feature rows.

    Anchors are samples with at least one positive (another sample with
    the same label); each anchor averages -log softmax similarity over
    its positives, and anchors are averaged. A batch with no positive
    pairs carries no contrastive signal and scores 0.
    """

    _, _, _, sim, positives = _supcon_parts(features, labels, temperature)
    counts = positives.sum(axis=1)
    valid = counts > 0
    if not valid.any():
        warnings.warn("no positive pairs; contrastive loss is 0", stacklevel=2)
        return 0.0
    logz = np.log(np.exp(sim - sim.max(axis=1, keepdims=True)).sum(axis=1))
    logprob = sim - (logz + sim.max(axis=1))[:, None]
    # diagonal is -inf by construction; keep it out of the product
    pos_logprob = np.where(positives, logprob, 0.0)
    per_anchor = -pos_logprob.sum(axis=1)[valid] / counts[valid]
    return float(per_anchor.mean())


def supcon_loss_grad(
    features, labels, temperature: float = DEFAULT_WEIGHTS.temperature
) -> np.ndarray:
    """d supcon_loss / d features (before normalization), (batch, dim)."""

    x, z, norms, sim, positives = _supcon_parts(features, labels, temperature)
    counts = positives.sum(axis=1)
    valid = counts > 0
    if not valid.any():
        return np.zeros_like(x)
    shifted = np.exp(sim - sim.max(axis=1, keepdims=True))
    softmax = shifted / shifted.sum(axis=1, keepdims=True)
    num_valid = int(valid.sum())
    coeff = np.zeros_like(softmax)
    coeff[valid] = softmax[valid] - positives[valid] / counts[valid, None]
    coeff[valid] /= num_valid * temperature
    grad_z = (coeff + coeff.T) @ z
    # back through row normalization z = x / |x|
    radial = np.sum(grad_z * z, axis=1, keepdims=True)
    return (grad_z - radial * z) / norms[:, None]


def total_loss(
    cls_loss: float,
    reg_loss: float,
    rank: float,
    con: float,
    weights: LossWeights = DEFAULT_WEIGHTS,
) -> float:
    """Weighted sum of the four loss components."""

    parts = (cls_loss, reg_loss, rank, con)
    if not all(np.isfinite(parts)):
        raise ValueError("loss components must be finite")
    return float(
        cls_loss
        + weights.lambda_reg * reg_loss
        + weights.lambda_rank * rank
        + weights.lambda_con * con
    )
