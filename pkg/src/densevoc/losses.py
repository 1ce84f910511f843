"""Training loss terms as pure numerical functions, with gradient checking.

Sign conventions: the focal heatmap term and the gIoU regression term are
returned in minimizable form (non-negative, zero at the perfect prediction).
Probabilities passed to any log are clamped to [1e-6, 1 - 1e-6] so the
functions are total on degenerate inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import log_softmax, softmax

from .core import Box, ValidationError, giou

PROB_EPS = 1e-6


@dataclass(frozen=True)
class LossConfig:
    alpha: float = 2.0  # focal down-weighting of confident positives
    beta: float = 4.0  # focal down-weighting near soft ground-truth peaks
    label_smoothing: float = 0.1

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise ValidationError("focal weights must be >= 0")
        if not (0.0 <= self.label_smoothing < 1.0):
            raise ValidationError("label smoothing must be in [0, 1)")


DEFAULT_CONFIG = LossConfig()


def _clamp(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def heatmap_loss(
    y: np.ndarray, y_gt: np.ndarray, n: int, cfg: LossConfig = DEFAULT_CONFIG
) -> float:
    """Penalty-reduced focal loss between predicted and target heatmaps.

    Cells where the target is exactly 1 use the positive branch
    (1-Y)^alpha * log(Y); all other cells use (1-Ybar)^beta * Y^alpha *
    log(1-Y). The sum is negated and divided by the object count ``n``.
    """
    y = np.asarray(y, dtype=float)
    y_gt = np.asarray(y_gt, dtype=float)
    if y.shape != y_gt.shape:
        raise ValidationError(f"heatmap shapes differ: {y.shape} vs {y_gt.shape}")
    if n < 1:
        raise ValidationError(f"object count must be >= 1, got {n}")
    y = _clamp(y)
    pos = y_gt == 1.0
    pos_term = (1.0 - y) ** cfg.alpha * np.log(y)
    neg_term = (1.0 - y_gt) ** cfg.beta * y**cfg.alpha * np.log(1.0 - y)
    return float(-np.where(pos, pos_term, neg_term).sum() / n)


def heatmap_loss_grad(
    y: np.ndarray, y_gt: np.ndarray, n: int, cfg: LossConfig = DEFAULT_CONFIG
) -> np.ndarray:
    """d(heatmap_loss)/dY, valid away from the clamping boundaries."""
    y = np.asarray(y, dtype=float)
    y_gt = np.asarray(y_gt, dtype=float)
    y = _clamp(y)
    a, b = cfg.alpha, cfg.beta
    pos = y_gt == 1.0
    d_pos = a * (1.0 - y) ** (a - 1.0) * np.log(y) - (1.0 - y) ** a / y
    d_neg = -((1.0 - y_gt) ** b) * (
        a * y ** (a - 1.0) * np.log(1.0 - y) - y**a / (1.0 - y)
    )
    return np.where(pos, d_pos, d_neg) / n


def giou_loss(pred: Sequence[Box], gt: Sequence[Box]) -> float:
    """1 - mean generalized IoU over paired boxes."""
    if len(pred) != len(gt) or not pred:
        raise ValidationError(
            f"box lists must be equal-length and non-empty, got {len(pred)} and {len(gt)}"
        )
    return float(1.0 - np.mean([giou(a, b) for a, b in zip(pred, gt)]))


def roi_cls_loss(logits: np.ndarray, label: int) -> float:
    """Softmax cross-entropy of a foreground/background logit pair."""
    logits = np.asarray(logits, dtype=float)
    if logits.shape != (2,) or label not in (0, 1):
        raise ValidationError("expected 2 logits and a binary label")
    return float(-log_softmax(logits)[label])


def roi_cls_loss_grad(logits: np.ndarray, label: int) -> np.ndarray:
    p = softmax(np.asarray(logits, dtype=float))
    p[label] -= 1.0
    return p


def roi_reg_loss(pred: Sequence[Box], gt: Sequence[Box]) -> float:
    """Mean absolute corner-coordinate difference over paired boxes."""
    if len(pred) != len(gt) or not pred:
        raise ValidationError(
            f"box lists must be equal-length and non-empty, got {len(pred)} and {len(gt)}"
        )
    p = np.array([b.as_tuple() for b in pred])
    g = np.array([b.as_tuple() for b in gt])
    return float(np.abs(p - g).mean())


def assoc_loss(a: np.ndarray, a_gt: np.ndarray) -> float:
    """Elementwise binary cross-entropy between association matrices.

    Normalized by the observation count M (one side of the matrix), not the
    element count M^2.
    """
    a = np.asarray(getattr(a, "values", a), dtype=float)
    a_gt = np.asarray(getattr(a_gt, "values", a_gt), dtype=float)
    if a.shape != a_gt.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"matrices must be square and equal-shape: {a.shape} vs {a_gt.shape}")
    p = _clamp(a)
    bce = -(a_gt * np.log(p) + (1.0 - a_gt) * np.log(1.0 - p))
    return float(bce.sum() / a.shape[0])


def assoc_loss_grad(a: np.ndarray, a_gt: np.ndarray) -> np.ndarray:
    """d(assoc_loss)/dA = (A - Abar) / (A (1 - A)) / M, away from clamping."""
    a = np.asarray(getattr(a, "values", a), dtype=float)
    a_gt = np.asarray(getattr(a_gt, "values", a_gt), dtype=float)
    p = _clamp(a)
    return (p - a_gt) / (p * (1.0 - p)) / a.shape[0]


def caption_loss(
    token_logits: np.ndarray, gt_tokens: Sequence[int], smoothing: float = 0.1
) -> float:
    """Label-smoothed cross-entropy over a caption's token positions.

    The target distribution puts 1 - smoothing on the true token and spreads
    smoothing uniformly over the V - 1 others; the per-position losses are
    averaged over the caption length.
    """
    logits = np.asarray(token_logits, dtype=float)
    targets = np.asarray(gt_tokens, dtype=int)
    if logits.ndim != 2 or logits.shape[0] != len(targets):
        raise ValidationError(f"expected (L, V) logits for {len(targets)} targets")
    length, vocab = logits.shape
    if targets.size and (targets.min() < 0 or targets.max() >= vocab):
        raise ValidationError("target token index out of vocabulary range")
    if not (0.0 <= smoothing < 1.0):
        raise ValidationError(f"smoothing must be in [0, 1), got {smoothing}")
    if smoothing > 0.0 and vocab < 2:
        raise ValidationError("smoothing requires a vocabulary of at least 2")
    log_p = log_softmax(logits, axis=1)
    q = np.full((length, vocab), smoothing / (vocab - 1) if vocab > 1 else 0.0)
    q[np.arange(length), targets] = 1.0 - smoothing
    return float(-(q * log_p).sum() / length)


def caption_loss_grad(
    token_logits: np.ndarray, gt_tokens: Sequence[int], smoothing: float = 0.1
) -> np.ndarray:
    logits = np.asarray(token_logits, dtype=float)
    targets = np.asarray(gt_tokens, dtype=int)
    length, vocab = logits.shape
    q = np.full((length, vocab), smoothing / (vocab - 1) if vocab > 1 else 0.0)
    q[np.arange(length), targets] = 1.0 - smoothing
    return (softmax(logits, axis=1) - q) / length


def finite_diff_check(
    f: Callable[[np.ndarray], float],
    grad_f: Callable[[np.ndarray], np.ndarray],
    point: np.ndarray,
    h: float = 1e-5,
) -> float:
    """Max relative error between central differences and an analytic gradient.

    Relative error per coordinate is |fd - analytic| / (|analytic| + 1e-8).
    """
    point = np.asarray(point, dtype=float)
    analytic = np.asarray(grad_f(point), dtype=float).reshape(-1)
    flat = point.reshape(-1)
    worst = 0.0
    for i in range(flat.size):
        step = np.zeros_like(flat)
        step[i] = h
        fd = (f((flat + step).reshape(point.shape)) - f((flat - step).reshape(point.shape))) / (
            2.0 * h
        )
        err = abs(fd - analytic[i]) / (abs(analytic[i]) + 1e-8)
        worst = max(worst, err)
    return worst
