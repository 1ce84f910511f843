"""JSON file formats: datasets, matrices, and sidecar tables.

Dataset files hold a list of video objects::

    [{"video_id": str, "num_frames": int,
      "tracks": [{"track_id": int, "caption": str?,
                  "boxes": [{"frame": int, "box": [x1, y1, x2, y2],
                             "score": float?, "caption": str?}]}]}]

Matrix files hold one matrix per file::

    {"video_id": str, "frame_of": [int], "dim": M, "values": [row-major]}

for association matrices, with ``"dim": [M, D]`` for feature matrices.
Schema violations are errors with a JSON-path diagnostic; unknown fields are
errors only under strict mode. Predicted-observation indices used by sidecar
files count detections in frame-major order, within a frame in track order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .assoc import AssocMatrix
from .core import Box, Caption, Detection, Trajectory, ValidationError, VideoRecord


class FormatError(ValueError):
    """Malformed input file; message carries the offending location."""


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise FormatError(f"{where}: missing required field {key!r}")
    value = obj[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise FormatError(f"{where}.{key}: expected a number, got {type(value).__name__}")
        return float(value)
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise FormatError(f"{where}.{key}: expected an integer, got {type(value).__name__}")
        return value
    if not isinstance(value, kind):
        raise FormatError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _check_unknown(obj: dict, allowed: set[str], where: str, strict: bool) -> None:
    if strict:
        unknown = set(obj) - allowed
        if unknown:
            raise FormatError(f"{where}: unknown fields {sorted(unknown)}")


def _parse_box(raw: Any, where: str) -> Box:
    if not isinstance(raw, list) or len(raw) != 4:
        raise FormatError(f"{where}: box must be a list [x1, y1, x2, y2]")
    try:
        return Box(*(float(v) for v in raw))
    except (TypeError, ValueError, ValidationError) as exc:
        raise FormatError(f"{where}: {exc}") from exc


def parse_dataset(data: Any, strict: bool = False) -> list[VideoRecord]:
    if not isinstance(data, list):
        raise FormatError("top level: expected a list of video objects")
    records = []
    for vi, video in enumerate(data):
        where = f"video[{vi}]"
        if not isinstance(video, dict):
            raise FormatError(f"{where}: expected an object")
        _check_unknown(video, {"video_id", "num_frames", "tracks"}, where, strict)
        video_id = _require(video, "video_id", str, where)
        num_frames = _require(video, "num_frames", int, where)
        tracks_raw = _require(video, "tracks", list, where)
        tracks = []
        for ti, track in enumerate(tracks_raw):
            twhere = f"{where}.tracks[{ti}]"
            if not isinstance(track, dict):
                raise FormatError(f"{twhere}: expected an object")
            _check_unknown(track, {"track_id", "caption", "boxes"}, twhere, strict)
            track_id = _require(track, "track_id", int, twhere)
            caption = None
            if track.get("caption") is not None:
                caption = Caption.from_text(_require(track, "caption", str, twhere))
            dets = []
            for bi, entry in enumerate(_require(track, "boxes", list, twhere)):
                bwhere = f"{twhere}.boxes[{bi}]"
                if not isinstance(entry, dict):
                    raise FormatError(f"{bwhere}: expected an object")
                _check_unknown(entry, {"frame", "box", "score", "caption"}, bwhere, strict)
                frame = _require(entry, "frame", int, bwhere)
                box = _parse_box(entry.get("box"), bwhere)
                score = _require(entry, "score", float, bwhere) if "score" in entry else 1.0
                det_cap = None
                if entry.get("caption") is not None:
                    det_cap = Caption.from_text(_require(entry, "caption", str, bwhere))
                try:
                    dets.append(
                        Detection(frame=frame, box=box, score=score, track_id=track_id, caption=det_cap)
                    )
                except ValidationError as exc:
                    raise FormatError(f"{bwhere}: {exc}") from exc
            try:
                tracks.append(
                    Trajectory(track_id=track_id, detections=tuple(dets), caption=caption)
                )
            except ValidationError as exc:
                raise FormatError(f"{twhere}: {exc}") from exc
        try:
            records.append(
                VideoRecord(video_id=video_id, num_frames=num_frames, trajectories=tuple(tracks))
            )
        except ValidationError as exc:
            raise FormatError(f"{where}: {exc}") from exc
    return records


def load_dataset(path: str | Path, strict: bool = False) -> list[VideoRecord]:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return parse_dataset(data, strict=strict)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def dataset_to_obj(records: list[VideoRecord]) -> list[dict]:
    out = []
    for record in records:
        tracks = []
        for track in record.trajectories:
            boxes = []
            for det in track.detections:
                entry: dict[str, Any] = {
                    "frame": det.frame,
                    "box": [det.box.x1, det.box.y1, det.box.x2, det.box.y2],
                    "score": det.score,
                }
                if det.caption is not None:
                    entry["caption"] = det.caption.raw
                boxes.append(entry)
            track_obj: dict[str, Any] = {"track_id": track.track_id, "boxes": boxes}
            if track.caption is not None:
                track_obj["caption"] = track.caption.raw
            tracks.append(track_obj)
        out.append(
            {"video_id": record.video_id, "num_frames": record.num_frames, "tracks": tracks}
        )
    return out


def save_dataset(records: list[VideoRecord], path: str | Path) -> None:
    # Compact form: dataset files can hold hundreds of thousands of boxes.
    Path(path).write_text(json.dumps(dataset_to_obj(records), separators=(",", ":")) + "\n")


@dataclass
class FeatureFile:
    video_id: str
    frame_of: np.ndarray
    values: np.ndarray  # (M, D)


def load_matrix(path: str | Path) -> AssocMatrix | FeatureFile:
    """Load an association matrix (dim: M) or a feature matrix (dim: [M, D])."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: top level: expected an object")
    where = str(path)
    video_id = _require(data, "video_id", str, where)
    frame_of = np.asarray(_require(data, "frame_of", list, where), dtype=int)
    values = np.asarray(_require(data, "values", list, where), dtype=float)
    if not np.isfinite(values).all():
        raise FormatError(f"{where}: matrix values must all be finite")
    dim = data.get("dim")
    if isinstance(dim, int):
        m = dim
        if values.size != m * m:
            raise FormatError(f"{where}: expected {m}x{m} values, got {values.size}")
        if len(frame_of) != m:
            raise FormatError(f"{where}: frame_of length {len(frame_of)} != dim {m}")
        try:
            return AssocMatrix(values=values.reshape(m, m), frame_of=frame_of)
        except ValidationError as exc:
            raise FormatError(f"{where}: {exc}") from exc
    if isinstance(dim, list) and len(dim) == 2:
        m, d = int(dim[0]), int(dim[1])
        if values.size != m * d:
            raise FormatError(f"{where}: expected {m}x{d} values, got {values.size}")
        if len(frame_of) != m:
            raise FormatError(f"{where}: frame_of length {len(frame_of)} != rows {m}")
        return FeatureFile(video_id=video_id, frame_of=frame_of, values=values.reshape(m, d))
    raise FormatError(f"{where}: dim must be an integer M or a pair [M, D]")


def save_matrix(
    video_id: str,
    frame_of: np.ndarray,
    values: np.ndarray,
    path: str | Path,
    kind: str | None = None,
) -> None:
    """Write an association ("assoc") or feature ("features") matrix file.

    ``kind`` may be omitted only when the shape is unambiguous; a square
    feature matrix must say so explicitly.
    """
    values = np.asarray(values, dtype=float)
    square = values.ndim == 2 and values.shape[0] == values.shape[1] == len(frame_of)
    if kind is None:
        kind = "assoc" if square else "features"
    if kind not in ("assoc", "features"):
        raise ValidationError(f"matrix kind must be 'assoc' or 'features', got {kind!r}")
    if kind == "assoc" and not square:
        raise ValidationError("association matrices must be square with matching frame_of")
    dim: int | list[int]
    if kind == "assoc":
        dim = int(values.shape[0])
    else:
        dim = [int(values.shape[0]), int(values.shape[1])]
    obj = {
        "video_id": video_id,
        "frame_of": [int(f) for f in frame_of],
        "dim": dim,
        "values": [float(v) for v in values.reshape(-1)],
    }
    Path(path).write_text(json.dumps(obj, separators=(",", ":")) + "\n")


def load_external_scores(path: str | Path) -> dict[tuple[str, int, int], float]:
    """Sidecar caption scores keyed (video_id, pred_observation_index, gt_track_id)."""
    path = Path(path)
    data = json.loads(path.read_text())
    if not isinstance(data, list):
        raise FormatError(f"{path}: top level: expected a list of score records")
    out: dict[tuple[str, int, int], float] = {}
    for i, rec in enumerate(data):
        where = f"{path}: record[{i}]"
        if not isinstance(rec, dict):
            raise FormatError(f"{where}: expected an object")
        video_id = _require(rec, "video_id", str, where)
        obs = _require(rec, "pred_observation_index", int, where)
        gt_track = _require(rec, "gt_track_id", int, where)
        score = _require(rec, "score", float, where)
        if not (0.0 <= score <= 1.0):
            raise FormatError(f"{where}: score must be in [0, 1], got {score}")
        out[(video_id, obs, gt_track)] = score
    return out


def load_likelihoods(
    path: str | Path,
) -> tuple[dict[tuple[str, int, int, str], float], dict[tuple[str, int, str], float]]:
    """Likelihood table records, split into per-frame and per-track entries.

    Per-frame records carry (video_id, frame, observation_index, query_id,
    nll); per-track records carry (video_id, track_id, query_id, nll).
    """
    path = Path(path)
    data = json.loads(path.read_text())
    if not isinstance(data, list):
        raise FormatError(f"{path}: top level: expected a list of likelihood records")
    per_frame: dict[tuple[str, int, int, str], float] = {}
    per_track: dict[tuple[str, int, str], float] = {}
    for i, rec in enumerate(data):
        where = f"{path}: record[{i}]"
        if not isinstance(rec, dict):
            raise FormatError(f"{where}: expected an object")
        video_id = _require(rec, "video_id", str, where)
        query_id = _require(rec, "query_id", str, where)
        nll = _require(rec, "nll", float, where)
        if nll < 0.0:
            raise FormatError(f"{where}: nll must be >= 0, got {nll}")
        if "track_id" in rec:
            per_track[(video_id, _require(rec, "track_id", int, where), query_id)] = nll
        else:
            frame = _require(rec, "frame", int, where)
            obs = _require(rec, "observation_index", int, where)
            per_frame[(video_id, frame, obs, query_id)] = nll
    return per_frame, per_track


def load_queries(path: str | Path) -> list[dict]:
    """Grounding queries with their annotated spans and per-frame boxes."""
    path = Path(path)
    data = json.loads(path.read_text())
    if not isinstance(data, list):
        raise FormatError(f"{path}: top level: expected a list of query records")
    queries = []
    for i, rec in enumerate(data):
        where = f"{path}: query[{i}]"
        if not isinstance(rec, dict):
            raise FormatError(f"{where}: expected an object")
        span = _require(rec, "span", list, where)
        if len(span) != 2 or span[0] > span[1]:
            raise FormatError(f"{where}: span must be [start, end] with start <= end")
        boxes = {}
        for entry in _require(rec, "boxes", list, where):
            frame = _require(entry, "frame", int, where)
            boxes[frame] = _parse_box(entry.get("box"), where)
        queries.append(
            {
                "video_id": _require(rec, "video_id", str, where),
                "query_id": _require(rec, "query_id", str, where),
                "text": _require(rec, "text", str, where),
                "span": (int(span[0]), int(span[1])),
                "boxes": boxes,
            }
        )
    return queries


def load_flat_records(
    path: str | Path,
    video_id: str,
    num_frames: int | None = None,
    one_based_frames: bool = False,
) -> VideoRecord:
    """Convert flat per-frame CSV rows into a track-grouped record.

    Rows are ``frame,track_id,x,y,w,h[,score]`` (the common tracking-bench
    layout: top-left corner plus width and height). Lines starting with '#'
    and blank lines are skipped. ``one_based_frames`` shifts frame numbers
    down by one on ingestion.
    """
    path = Path(path)
    flat: list[tuple[int, int, Detection]] = []
    max_frame = -1
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (6, 7):
            raise FormatError(f"{path}: line {lineno}: expected 6 or 7 comma-separated fields")
        try:
            frame = int(parts[0]) - (1 if one_based_frames else 0)
            track_id = int(parts[1])
            x, y, w, h = (float(v) for v in parts[2:6])
            score = float(parts[6]) if len(parts) == 7 else 1.0
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from exc
        try:
            det = Detection(
                frame=frame, box=Box.from_xywh(x, y, w, h), score=score, track_id=track_id
            )
        except ValidationError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from exc
        flat.append((frame, track_id, det))
        max_frame = max(max_frame, frame)
    if num_frames is None:
        num_frames = max_frame + 1 if max_frame >= 0 else 1
    try:
        return VideoRecord.regroup(video_id, num_frames, flat)
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_json(obj: Any, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")
