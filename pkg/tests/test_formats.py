from __future__ import annotations

import json

import numpy as np
import pytest

from densevoc.assoc import AssocMatrix
from densevoc.formats import (
    FeatureFile,
    FormatError,
    dataset_to_obj,
    load_dataset,
    load_external_scores,
    load_likelihoods,
    load_matrix,
    load_queries,
    parse_dataset,
    save_dataset,
    save_matrix,
)

GOOD = [
    {
        "video_id": "v0",
        "num_frames": 3,
        "tracks": [
            {
                "track_id": 1,
                "caption": "a red car crosses",
                "boxes": [
                    {"frame": 0, "box": [0, 0, 10, 10], "score": 0.9},
                    {"frame": 2, "box": [5, 0, 15, 10], "caption": "a red car"},
                ],
            },
            {"track_id": 2, "boxes": [{"frame": 1, "box": [20, 20, 30, 30]}]},
        ],
    }
]


def test_parse_good_dataset() -> None:
    records = parse_dataset(GOOD)
    assert len(records) == 1
    video = records[0]
    assert video.num_frames == 3
    assert video.trajectories[0].caption.tokens == ("a", "red", "car", "crosses")
    assert video.trajectories[0].detections[1].caption.raw == "a red car"
    assert video.trajectories[1].detections[0].score == 1.0


def test_round_trip_identity(tmp_path) -> None:
    records = parse_dataset(GOOD)
    path = tmp_path / "data.json"
    save_dataset(records, path)
    again = load_dataset(path)
    assert dataset_to_obj(again) == dataset_to_obj(records)
    save_dataset(again, tmp_path / "data2.json")
    assert path.read_text() == (tmp_path / "data2.json").read_text()


def test_round_trip_on_all_fixture_files(tmp_path) -> None:
    from pathlib import Path

    fixtures = Path(__file__).parent.parent / "fixtures"
    for name in ("synth20_gt.json", "golden_seed42_gt.json", "golden_seed42_pred.json"):
        records = load_dataset(fixtures / name)
        out = tmp_path / name
        save_dataset(records, out)
        assert out.read_bytes() == (fixtures / name).read_bytes(), name
        assert dataset_to_obj(load_dataset(out)) == dataset_to_obj(records)


def test_unknown_fields_strictness() -> None:
    data = json.loads(json.dumps(GOOD))
    data[0]["tracks"][0]["confidence_notes"] = "extra"
    parse_dataset(data, strict=False)
    with pytest.raises(FormatError, match="unknown fields"):
        parse_dataset(data, strict=True)


def test_malformed_json_reports_position(tmp_path) -> None:
    path = tmp_path / "broken.json"
    path.write_text('[{"video_id": "v0", }]')
    with pytest.raises(FormatError, match="line 1"):
        load_dataset(path)


def test_schema_error_reports_path() -> None:
    data = json.loads(json.dumps(GOOD))
    data[0]["tracks"][0]["boxes"][0]["box"] = [0, 0, 10]
    with pytest.raises(FormatError, match=r"video\[0\].tracks\[0\].boxes\[0\]"):
        parse_dataset(data)


def test_invariant_violation_reports_path() -> None:
    data = json.loads(json.dumps(GOOD))
    data[0]["tracks"][0]["boxes"][0]["score"] = 2.0
    with pytest.raises(FormatError, match="score"):
        parse_dataset(data)


def test_assoc_matrix_round_trip(tmp_path) -> None:
    path = tmp_path / "assoc.json"
    values = np.array([[1.0, 0.25], [0.5, 1.0]])
    save_matrix("v0", np.array([0, 1]), values, path)
    loaded = load_matrix(path)
    assert isinstance(loaded, AssocMatrix)
    assert loaded.values == pytest.approx(values)
    assert loaded.frame_of.tolist() == [0, 1]


def test_feature_matrix_round_trip(tmp_path) -> None:
    path = tmp_path / "features.json"
    values = np.arange(6.0).reshape(3, 2)
    save_matrix("v0", np.array([0, 0, 1]), values, path)
    loaded = load_matrix(path)
    assert isinstance(loaded, FeatureFile)
    assert loaded.values == pytest.approx(values)
    assert loaded.video_id == "v0"


def test_matrix_length_checks(tmp_path) -> None:
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"video_id": "v", "frame_of": [0], "dim": 2, "values": [1, 0, 0, 1]}))
    with pytest.raises(FormatError, match="frame_of"):
        load_matrix(path)
    path.write_text(json.dumps({"video_id": "v", "frame_of": [0, 1], "dim": 2, "values": [1, 0]}))
    with pytest.raises(FormatError, match="values"):
        load_matrix(path)


def test_matrix_rejects_nonfinite(tmp_path) -> None:
    path = tmp_path / "nan.json"
    path.write_text(
        json.dumps({"video_id": "v", "frame_of": [0], "dim": 1, "values": [float("nan")]})
    )
    with pytest.raises(FormatError, match="finite"):
        load_matrix(path)


def test_external_scores_sidecar(tmp_path) -> None:
    path = tmp_path / "ext.json"
    path.write_text(
        json.dumps(
            [{"video_id": "v0", "pred_observation_index": 3, "gt_track_id": 2, "score": 0.75}]
        )
    )
    scores = load_external_scores(path)
    assert scores[("v0", 3, 2)] == pytest.approx(0.75)
    path.write_text(
        json.dumps([{"video_id": "v0", "pred_observation_index": 0, "gt_track_id": 1, "score": 1.5}])
    )
    with pytest.raises(FormatError, match="score"):
        load_external_scores(path)


def test_likelihood_table_both_record_shapes(tmp_path) -> None:
    path = tmp_path / "nll.json"
    path.write_text(
        json.dumps(
            [
                {"video_id": "v0", "frame": 1, "observation_index": 0, "query_id": "q1", "nll": 0.5},
                {"video_id": "v0", "track_id": 4, "query_id": "q1", "nll": 1.25},
            ]
        )
    )
    per_frame, per_track = load_likelihoods(path)
    assert per_frame[("v0", 1, 0, "q1")] == pytest.approx(0.5)
    assert per_track[("v0", 4, "q1")] == pytest.approx(1.25)
    path.write_text(json.dumps([{"video_id": "v0", "track_id": 4, "query_id": "q", "nll": -1}]))
    with pytest.raises(FormatError, match="nll"):
        load_likelihoods(path)


def test_queries_file(tmp_path) -> None:
    path = tmp_path / "queries.json"
    path.write_text(
        json.dumps(
            [
                {
                    "video_id": "v0",
                    "query_id": "q1",
                    "text": "the red car",
                    "span": [2, 5],
                    "boxes": [{"frame": 2, "box": [0, 0, 10, 10]}],
                }
            ]
        )
    )
    queries = load_queries(path)
    assert queries[0]["span"] == (2, 5)
    assert 2 in queries[0]["boxes"]
    path.write_text(json.dumps([{"video_id": "v", "query_id": "q", "text": "t", "span": [5, 2], "boxes": []}]))
    with pytest.raises(FormatError, match="span"):
        load_queries(path)
