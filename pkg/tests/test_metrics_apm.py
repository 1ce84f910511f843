from __future__ import annotations

import numpy as np
import pytest

from densevoc.core import Box
from densevoc.metrics import ap_m, average_precision, grounding_ious

from conftest import make_track, make_video
from oracles import detection_ap_oracle


def _one_frame_video(video_id, tracks):
    return make_video(video_id, tracks, num_frames=1)


def test_apm_perfect_single_detection() -> None:
    gt = _one_frame_video("v", [make_track(1, [(0, 0.0, 0.0, 10.0, 10.0)], caption="a red car")])
    pred = _one_frame_video(
        "v", [make_track(1, [(0, 0.5, 0.0, 10.0, 10.0)], caption="a red car")]
    )
    report = ap_m([pred], [gt])
    assert report.overall == pytest.approx(1.0)


def test_apm_low_iou_passes_one_threshold_band() -> None:
    gt = _one_frame_video("v", [make_track(1, [(0, 0.0, 0.0, 10.0, 10.0)], caption="a red car")])
    # IoU exactly 0.35: passes only the 0.3 threshold; caption identical.
    pred = _one_frame_video(
        "v", [make_track(1, [(0, 0.0, 0.0, 3.5, 10.0)], caption="a red car")]
    )
    report = ap_m([pred], [gt])
    assert report.overall == pytest.approx(0.2)


def test_apm_captionless_gt_accepts_any_caption() -> None:
    gt = _one_frame_video("v", [make_track(1, [(0, 0.0, 0.0, 10.0, 10.0)])])
    pred = _one_frame_video(
        "v", [make_track(1, [(0, 0.5, 0.0, 10.0, 10.0)], caption="total nonsense words")]
    )
    report = ap_m([pred], [gt])
    assert report.overall == pytest.approx(1.0)


def test_apm_empty_prediction_scores_zero() -> None:
    gt = _one_frame_video("v", [make_track(1, [(0, 0.0, 0.0, 10.0, 10.0)], caption="a dog")])
    pred = make_video("v", [], num_frames=1)
    report = ap_m([pred], [gt])
    assert report.overall == 0.0
    assert report.num_frames == 1


def test_apm_frames_without_gt_excluded() -> None:
    gt = make_video("v", [make_track(1, [(1, 0.0, 0.0, 10.0, 10.0)], caption="a dog")], 3)
    pred = make_video("v", [make_track(1, [(1, 0.0, 0.0, 10.0, 10.0)], caption="a dog")], 3)
    report = ap_m([pred], [gt])
    assert report.num_frames == 1
    assert report.overall == pytest.approx(1.0)


def test_apm_grid_shape_and_monotone_thresholds() -> None:
    gt = _one_frame_video("v", [make_track(1, [(0, 0.0, 0.0, 10.0, 10.0)], caption="a red car")])
    pred = _one_frame_video(
        "v", [make_track(1, [(0, 0.0, 0.0, 6.0, 10.0)], caption="a red car")]
    )  # IoU 0.6
    report = ap_m([pred], [gt])
    assert report.grid.shape == (5, 5)
    # Tightening IoU thresholds can only lower the per-pair AP.
    assert np.all(np.diff(report.grid, axis=0) <= 1e-12)


def _random_detection_scene(rng, video_id):
    n_gt = int(rng.integers(1, 5))
    n_pred = int(rng.integers(0, 6))
    gt_tracks = []
    for k in range(n_gt):
        x, y = rng.uniform(0, 50, size=2)
        w, h = rng.uniform(5, 25, size=2)
        gt_tracks.append(
            make_track(k + 1, [(0, float(x), float(y), float(x + w), float(y + h))], caption="a dog runs")
        )
    pred_tracks = []
    for k in range(n_pred):
        x, y = rng.uniform(0, 50, size=2)
        w, h = rng.uniform(5, 25, size=2)
        pred_tracks.append(
            make_track(
                k + 1,
                [(0, float(x), float(y), float(x + w), float(y + h))],
                caption="a dog runs",
                scores=[float(rng.uniform(0.05, 1.0))],
            )
        )
    return (
        _one_frame_video(video_id, pred_tracks),
        _one_frame_video(video_id, gt_tracks),
    )


def test_apm_reduces_to_detection_ap_with_zero_meteor_thresholds(rng) -> None:
    iou_thresholds = (0.3, 0.4, 0.5, 0.6, 0.7)
    for trial in range(40):
        pred, gt = _random_detection_scene(rng, f"v{trial}")
        report = ap_m([pred], [gt], iou_thresholds=iou_thresholds, meteor_thresholds=(0.0,))
        pred_dets = [
            (d.box, d.score) for t in pred.trajectories for d in t.detections
        ]
        gt_boxes = [d.box for t in gt.trajectories for d in t.detections]
        expected = np.mean(
            [detection_ap_oracle(pred_dets, gt_boxes, t) for t in iou_thresholds]
        )
        assert report.overall == pytest.approx(expected, abs=1e-12), trial


def test_average_precision_all_points_interpolation() -> None:
    # Ranked flags TP, FP, TP over 2 gt: precision envelope gives 1*0.5 + (2/3)*0.5.
    value = average_precision([True, False, True], n_gt=2)
    assert value == pytest.approx(0.5 + 0.5 * 2 / 3, abs=1e-12)


def test_grounding_ious_simple_average() -> None:
    gt_boxes = {0: Box(0, 0, 10, 10), 1: Box(0, 0, 10, 10)}
    pred_boxes = {0: Box(0, 0, 10, 5), 1: Box(0, 0, 10, 10)}
    s, t, v = grounding_ious(pred_boxes, (0, 1), gt_boxes, (0, 1))
    assert s == pytest.approx(0.75)
    assert t == 1.0
    assert v == pytest.approx(0.75)


def test_grounding_ious_span_overlap_counting() -> None:
    gt_boxes = {f: Box(0, 0, 10, 10) for f in range(4, 9)}
    pred_boxes = {f: Box(0, 0, 10, 10) for f in range(2, 7)}
    s, t, v = grounding_ious(pred_boxes, (2, 6), gt_boxes, (4, 8))
    assert t == pytest.approx(3 / 7)
    assert v == pytest.approx(3 / 7)
    # sIoU over the gt span: frames 4..6 hit, 7..8 missing -> 3/5.
    assert s == pytest.approx(3 / 5)


def test_grounding_ious_disjoint_spans() -> None:
    gt_boxes = {f: Box(0, 0, 10, 10) for f in range(5, 8)}
    pred_boxes = {f: Box(0, 0, 10, 10) for f in range(0, 3)}
    s, t, v = grounding_ious(pred_boxes, (0, 2), gt_boxes, (5, 7))
    assert t == 0.0
    assert v == 0.0
    assert s == 0.0
