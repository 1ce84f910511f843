"""Shared domain types and box geometry.

Boxes are corner pairs (x1, y1, x2, y2) in real-valued coordinates; any
(x, y, w, h) input is converted at ingestion time. Zero-area boxes are legal
and score IoU 0 against everything, including themselves, so degraded
synthetic data never crashes an evaluation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class ValidationError(ValueError):
    """Raised when a domain object violates one of its invariants."""


@dataclass(frozen=True)
class Box:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        if not (self.x1 <= self.x2 and self.y1 <= self.y2):
            raise ValidationError(
                f"box corners out of order: ({self.x1}, {self.y1}, {self.x2}, {self.y2})"
            )

    @classmethod
    def from_xywh(cls, x: float, y: float, w: float, h: float) -> "Box":
        return cls(x, y, x + w, y + h)

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    def translate(self, dx: float, dy: float) -> "Box":
        return Box(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)


_TOKEN_CLEANER = re.compile(r"[^a-z0-9]+")


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase, fold punctuation to spaces, split on whitespace."""
    return tuple(_TOKEN_CLEANER.sub(" ", text.lower()).split())


@dataclass(frozen=True)
class Caption:
    """A caption as its raw string plus the deterministic tokenization."""

    raw: str
    tokens: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.tokens is None:
            object.__setattr__(self, "tokens", tokenize(self.raw))
        else:
            object.__setattr__(self, "tokens", tuple(self.tokens))
            if self.tokens != tokenize(self.raw):
                raise ValidationError(
                    f"tokens {self.tokens!r} are not the tokenization of {self.raw!r}"
                )

    @classmethod
    def from_text(cls, text: str) -> "Caption":
        return cls(raw=text)

    def __bool__(self) -> bool:
        return len(self.tokens) > 0


@dataclass(frozen=True)
class Detection:
    """One object observation in one frame."""

    frame: int
    box: Box
    score: float = 1.0
    track_id: int | None = None
    caption: Caption | None = None

    def __post_init__(self) -> None:
        if self.frame < 0:
            raise ValidationError(f"frame index must be >= 0, got {self.frame}")
        if not (0.0 <= self.score <= 1.0):
            raise ValidationError(f"score must be in [0, 1], got {self.score}")
        if self.track_id is not None and self.track_id < 1:
            raise ValidationError(f"track_id must be positive, got {self.track_id}")


@dataclass(frozen=True)
class Trajectory:
    """Per-frame detections sharing one identity, at most one per frame."""

    track_id: int
    detections: tuple[Detection, ...]
    caption: Caption | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "detections", tuple(self.detections))
        if self.track_id < 1:
            raise ValidationError(f"track_id must be positive, got {self.track_id}")
        frames = [d.frame for d in self.detections]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValidationError(
                f"track {self.track_id}: frames must be strictly increasing, got {frames}"
            )
        for d in self.detections:
            if d.track_id is not None and d.track_id != self.track_id:
                raise ValidationError(
                    f"detection track_id {d.track_id} disagrees with trajectory {self.track_id}"
                )

    def __len__(self) -> int:
        return len(self.detections)

    @property
    def frames(self) -> tuple[int, ...]:
        return tuple(d.frame for d in self.detections)


@dataclass(frozen=True)
class VideoRecord:
    """All trajectories of one video, for either predictions or ground truth."""

    video_id: str
    num_frames: int
    trajectories: tuple[Trajectory, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        if self.num_frames < 1:
            raise ValidationError(f"num_frames must be >= 1, got {self.num_frames}")
        seen: set[int] = set()
        for track in self.trajectories:
            if track.track_id in seen:
                raise ValidationError(
                    f"video {self.video_id!r}: duplicate track_id {track.track_id}"
                )
            seen.add(track.track_id)
            for det in track.detections:
                if det.frame >= self.num_frames:
                    raise ValidationError(
                        f"video {self.video_id!r}: frame {det.frame} >= num_frames {self.num_frames}"
                    )

    def detections_by_frame(self) -> list[list[tuple[int, Detection]]]:
        """Per-frame lists of (track_id, detection), tracks in record order."""
        frames: list[list[tuple[int, Detection]]] = [[] for _ in range(self.num_frames)]
        for track in self.trajectories:
            for det in track.detections:
                frames[det.frame].append((track.track_id, det))
        return frames

    def flatten(self) -> list[tuple[int, int, Detection]]:
        """All detections as (frame, track_id, detection), frame-major order."""
        out = []
        for frame, dets in enumerate(self.detections_by_frame()):
            for track_id, det in dets:
                out.append((frame, track_id, det))
        return out

    @classmethod
    def regroup(
        cls,
        video_id: str,
        num_frames: int,
        detections: list[tuple[int, int, Detection]],
        captions: dict[int, Caption] | None = None,
    ) -> "VideoRecord":
        """Rebuild trajectories from flat (frame, track_id, detection) rows."""
        by_track: dict[int, list[tuple[int, Detection]]] = {}
        for frame, track_id, det in detections:
            by_track.setdefault(track_id, []).append((frame, det))
        tracks = []
        for track_id in sorted(by_track):
            dets = tuple(d for _, d in sorted(by_track[track_id], key=lambda x: x[0]))
            cap = captions.get(track_id) if captions else None
            tracks.append(Trajectory(track_id=track_id, detections=dets, caption=cap))
        return cls(video_id=video_id, num_frames=num_frames, trajectories=tuple(tracks))


def iou(a: Box, b: Box) -> float:
    """Intersection over union; 0 by convention when the union has zero area."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    inter = max(ix, 0.0) * max(iy, 0.0)
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def giou(a: Box, b: Box) -> float:
    """Generalized IoU: IoU minus the enclosing-hull slack, in (-1, 1]."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    inter = max(ix, 0.0) * max(iy, 0.0)
    union = a.area + b.area - inter
    hull = (max(a.x2, b.x2) - min(a.x1, b.x1)) * (max(a.y2, b.y2) - min(a.y1, b.y1))
    base = inter / union if union > 0.0 else 0.0
    if hull <= 0.0:
        return base
    return base - (hull - union) / hull
