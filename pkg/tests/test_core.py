from __future__ import annotations

import pytest

from densevoc.core import (
    Box,
    Caption,
    Detection,
    Trajectory,
    ValidationError,
    VideoRecord,
    giou,
    iou,
    tokenize,
)

from conftest import make_track, make_video


def test_iou_identity() -> None:
    b = Box(0, 0, 1, 1)
    assert iou(b, b) == 1.0


def test_iou_disjoint() -> None:
    assert iou(Box(0, 0, 1, 1), Box(2, 2, 3, 3)) == 0.0


def test_iou_hand_geometry() -> None:
    assert iou(Box(0, 0, 2, 2), Box(1, 0, 3, 2)) == pytest.approx(1 / 3, abs=1e-12)


def test_giou_identical() -> None:
    b = Box(0, 0, 1, 1)
    assert giou(b, b) == 1.0


def test_giou_disjoint_hand_geometry() -> None:
    assert giou(Box(0, 0, 1, 1), Box(2, 0, 3, 1)) == pytest.approx(-1 / 3, abs=1e-12)


def test_giou_hull_equals_union() -> None:
    assert giou(Box(0, 0, 2, 2), Box(1, 0, 3, 2)) == pytest.approx(1 / 3, abs=1e-12)


def _random_box(rng) -> Box:
    x1, y1 = rng.uniform(-10, 10, size=2)
    w, h = rng.uniform(0.1, 8, size=2)
    return Box(float(x1), float(y1), float(x1 + w), float(y1 + h))


def test_iou_symmetric(rng) -> None:
    for _ in range(300):
        a, b = _random_box(rng), _random_box(rng)
        assert iou(a, b) == pytest.approx(iou(b, a), abs=1e-15)


def test_giou_never_exceeds_iou(rng) -> None:
    for _ in range(300):
        a, b = _random_box(rng), _random_box(rng)
        assert giou(a, b) <= iou(a, b) + 1e-15


def test_giou_translation_invariant(rng) -> None:
    for _ in range(100):
        a, b = _random_box(rng), _random_box(rng)
        dx, dy = rng.uniform(-50, 50, size=2)
        assert giou(a.translate(dx, dy), b.translate(dx, dy)) == pytest.approx(
            giou(a, b), abs=1e-12
        )


def test_zero_area_box_is_legal_and_scores_zero() -> None:
    point = Box(1, 1, 1, 1)
    assert iou(point, point) == 0.0
    assert iou(point, Box(0, 0, 2, 2)) == 0.0


def test_box_corner_order_enforced() -> None:
    with pytest.raises(ValidationError):
        Box(1, 0, 0, 1)


def test_box_from_xywh() -> None:
    assert Box.from_xywh(1, 2, 3, 4) == Box(1, 2, 4, 6)


def test_detection_score_range() -> None:
    with pytest.raises(ValidationError):
        Detection(frame=0, box=Box(0, 0, 1, 1), score=1.5)
    with pytest.raises(ValidationError):
        Detection(frame=-1, box=Box(0, 0, 1, 1))


def test_trajectory_frames_strictly_increasing() -> None:
    with pytest.raises(ValidationError):
        make_track(1, [(0, 0, 0, 1, 1), (0, 0, 0, 1, 1)])


def test_video_rejects_duplicate_track_ids() -> None:
    track = make_track(1, [(0, 0, 0, 1, 1)])
    with pytest.raises(ValidationError):
        make_video("v", [track, track], num_frames=2)


def test_video_rejects_frame_out_of_range() -> None:
    with pytest.raises(ValidationError):
        make_video("v", [make_track(1, [(5, 0, 0, 1, 1)])], num_frames=3)


def test_flatten_regroup_round_trip(rng) -> None:
    tracks = [
        make_track(3, [(0, 0, 0, 1, 1), (2, 1, 1, 2, 2)], caption="a red car crosses"),
        make_track(7, [(1, 4, 4, 6, 6)], caption="a dog waits"),
        make_track(2, [(0, 2, 2, 3, 3), (1, 2, 2, 3, 3), (2, 2, 2, 3, 3)]),
    ]
    video = make_video("v", tracks, num_frames=3)
    rebuilt = VideoRecord.regroup(
        video.video_id,
        video.num_frames,
        video.flatten(),
        captions={t.track_id: t.caption for t in tracks if t.caption},
    )
    assert {t.track_id for t in rebuilt.trajectories} == {2, 3, 7}
    for original in tracks:
        twin = next(t for t in rebuilt.trajectories if t.track_id == original.track_id)
        assert twin.frames == original.frames
        assert twin.caption == original.caption
        assert [d.box for d in twin.detections] == [d.box for d in original.detections]


def test_tokenize_idempotent() -> None:
    for text in ("A red CAR!", "dog, dog; dog", "  spaces   everywhere ", "x1 -- y2"):
        tokens = tokenize(text)
        assert tokenize(" ".join(tokens)) == tokens


def test_caption_tokens_must_match_raw() -> None:
    assert Caption.from_text("A dog!").tokens == ("a", "dog")
    with pytest.raises(ValidationError):
        Caption(raw="a dog", tokens=("dog",))
