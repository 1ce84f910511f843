from __future__ import annotations

import math

import numpy as np
import pytest

from densevoc.core import Box, ValidationError
from densevoc.losses import (
    LossConfig,
    assoc_loss,
    assoc_loss_grad,
    caption_loss,
    caption_loss_grad,
    finite_diff_check,
    giou_loss,
    heatmap_loss,
    heatmap_loss_grad,
    roi_cls_loss,
    roi_cls_loss_grad,
    roi_reg_loss,
)

LN2 = math.log(2.0)


def test_heatmap_perfect_prediction_is_tiny() -> None:
    y = np.ones((4, 4))
    assert heatmap_loss(y, np.ones((4, 4)), n=2) == pytest.approx(0.0, abs=1e-5)


def test_heatmap_positive_branch_value() -> None:
    value = heatmap_loss(np.array([[0.5]]), np.array([[1.0]]), n=1)
    assert value == pytest.approx(0.25 * LN2, abs=1e-9)


def test_heatmap_negative_branch_value() -> None:
    value = heatmap_loss(np.array([[0.5]]), np.array([[0.0]]), n=1)
    assert value == pytest.approx(0.25 * LN2, abs=1e-9)


def test_heatmap_soft_target_uses_negative_branch() -> None:
    # A 0.99 target is still the "otherwise" case; only exact 1 is positive.
    soft = heatmap_loss(np.array([[0.5]]), np.array([[0.99]]), n=1)
    assert soft == pytest.approx((0.01**4) * 0.25 * LN2, abs=1e-9)


def test_heatmap_shape_and_count_validation() -> None:
    with pytest.raises(ValidationError):
        heatmap_loss(np.ones((2, 2)), np.ones((2, 3)), n=1)
    with pytest.raises(ValidationError):
        heatmap_loss(np.ones((2, 2)), np.ones((2, 2)), n=0)


def test_giou_loss_identical_zero() -> None:
    boxes = [Box(0, 0, 1, 1), Box(2, 2, 5, 5)]
    assert giou_loss(boxes, boxes) == pytest.approx(0.0, abs=1e-12)


def test_giou_loss_disjoint_pair() -> None:
    value = giou_loss([Box(0, 0, 1, 1)], [Box(2, 0, 3, 1)])
    assert value == pytest.approx(4 / 3, abs=1e-9)


def test_giou_loss_two_pair_mean() -> None:
    pred = [Box(0, 0, 1, 1), Box(0, 0, 2, 2)]
    gt = [Box(0, 0, 1, 1), Box(1, 0, 3, 2)]
    assert giou_loss(pred, gt) == pytest.approx(1 - (1 + 1 / 3) / 2, abs=1e-9)


def test_giou_loss_validates_lengths() -> None:
    with pytest.raises(ValidationError):
        giou_loss([], [])
    with pytest.raises(ValidationError):
        giou_loss([Box(0, 0, 1, 1)], [])


def test_roi_cls_uniform_logits() -> None:
    assert roi_cls_loss(np.array([0.0, 0.0]), 0) == pytest.approx(LN2, abs=1e-9)


def test_roi_cls_confident_hit_and_miss() -> None:
    hit = roi_cls_loss(np.array([10.0, 0.0]), 0)
    miss = roi_cls_loss(np.array([0.0, 10.0]), 0)
    assert hit == pytest.approx(math.log(1 + math.exp(-10.0)), abs=1e-9)
    assert hit == pytest.approx(4.54e-5, abs=1e-6)
    assert miss == pytest.approx(10.0 + math.log(1 + math.exp(-10.0)), abs=1e-9)


def test_roi_reg_examples() -> None:
    a = [Box(0, 0, 1, 1)]
    assert roi_reg_loss(a, a) == 0.0
    assert roi_reg_loss(a, [Box(1, 1, 2, 2)]) == pytest.approx(1.0)
    assert roi_reg_loss(a, [Box(0, 0, 1, 3)]) == pytest.approx(0.5)


def test_assoc_loss_perfect_binary_is_tiny() -> None:
    a = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert assoc_loss(a, a) == pytest.approx(0.0, abs=1e-4)


def test_assoc_loss_single_element() -> None:
    assert assoc_loss(np.array([[0.5]]), np.array([[1.0]])) == pytest.approx(LN2, abs=1e-9)


def test_assoc_loss_normalized_by_m_not_m_squared() -> None:
    value = assoc_loss(np.full((2, 2), 0.5), np.eye(2))
    assert value == pytest.approx(2 * LN2, abs=1e-9)


def test_assoc_loss_permutation_invariant(rng) -> None:
    a = rng.uniform(0.05, 0.95, size=(5, 5))
    a_gt = (rng.random((5, 5)) < 0.5).astype(float)
    perm = rng.permutation(5)
    assert assoc_loss(a[np.ix_(perm, perm)], a_gt[np.ix_(perm, perm)]) == pytest.approx(
        assoc_loss(a, a_gt), abs=1e-12
    )


def test_caption_loss_uniform_logits() -> None:
    logits = np.zeros((3, 4))
    assert caption_loss(logits, [0, 1, 2], smoothing=0.0) == pytest.approx(
        math.log(4), abs=1e-9
    )


def test_caption_loss_hand_softmax() -> None:
    logits = np.array([[math.log(3.0), 0.0]])
    assert caption_loss(logits, [0], smoothing=0.0) == pytest.approx(-math.log(0.75), abs=1e-9)


def test_caption_loss_smoothed_mixture() -> None:
    logits = np.array([[math.log(3.0), 0.0]])
    expected = 0.9 * -math.log(0.75) + 0.1 * -math.log(0.25)
    assert caption_loss(logits, [0], smoothing=0.1) == pytest.approx(expected, abs=1e-9)


def test_caption_loss_zero_smoothing_equals_plain_cross_entropy(rng) -> None:
    logits = rng.normal(size=(6, 9))
    targets = rng.integers(0, 9, size=6)
    smoothed = caption_loss(logits, targets, smoothing=0.0)
    log_p = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
    plain = float(-log_p[np.arange(6), targets].mean())
    assert smoothed == pytest.approx(plain, abs=1e-12)


def test_caption_loss_target_out_of_range() -> None:
    with pytest.raises(ValidationError):
        caption_loss(np.zeros((1, 3)), [3])


def test_loss_config_validation() -> None:
    with pytest.raises(ValidationError):
        LossConfig(alpha=-1.0)
    with pytest.raises(ValidationError):
        LossConfig(label_smoothing=1.0)


def test_finite_diff_polynomial_exactness() -> None:
    err = finite_diff_check(
        lambda x: float((x**2).sum()), lambda x: 2 * x, np.array([1.0, 2.0])
    )
    assert err <= 1e-6


def test_assoc_gradient_matches_finite_differences(rng) -> None:
    for _ in range(10):
        a = rng.uniform(0.1, 0.9, size=(4, 4))
        a_gt = (rng.random((4, 4)) < 0.5).astype(float)
        err = finite_diff_check(
            lambda v: assoc_loss(v, a_gt), lambda v: assoc_loss_grad(v, a_gt), a
        )
        assert err <= 1e-4


def test_heatmap_gradient_matches_finite_differences(rng) -> None:
    for _ in range(10):
        y = rng.uniform(0.1, 0.9, size=(4, 4))
        y_gt = np.where(rng.random((4, 4)) < 0.3, 1.0, rng.uniform(0, 0.95, size=(4, 4)))
        err = finite_diff_check(
            lambda v: heatmap_loss(v, y_gt, n=2), lambda v: heatmap_loss_grad(v, y_gt, n=2), y
        )
        assert err <= 1e-4


def test_caption_gradient_matches_finite_differences(rng) -> None:
    for _ in range(10):
        logits = rng.normal(size=(4, 6))
        targets = rng.integers(0, 6, size=4)
        err = finite_diff_check(
            lambda v: caption_loss(v, targets, smoothing=0.1),
            lambda v: caption_loss_grad(v, targets, smoothing=0.1),
            logits,
        )
        assert err <= 1e-4


def test_roi_cls_gradient_matches_finite_differences(rng) -> None:
    for _ in range(10):
        logits = rng.normal(size=2)
        label = int(rng.integers(0, 2))
        err = finite_diff_check(
            lambda v: roi_cls_loss(v, label), lambda v: roi_cls_loss_grad(v, label), logits
        )
        assert err <= 1e-4
