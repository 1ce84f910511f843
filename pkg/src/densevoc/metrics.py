"""Tracking-and-captioning evaluation: CHOTA, frame mAP-METEOR, grounding IoUs.

CHOTA combines detection accuracy, association accuracy and captioning
accuracy over a grid of localization thresholds. Matching per frame follows
the two-pass scheme of the reference higher-order tracking evaluator: pass 1
estimates track-pair association strength from raw per-frame similarities,
pass 2 matches detections per frame by maximum estimated association
strength with an IoU tie-break, pairs below the localization threshold being
ineligible. Cross-video pooling is micro-averaged per threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .capmetrics import IdfTable, cider_pair, exact_match, meteor_lite
from .core import Box, Caption, ValidationError, VideoRecord, iou

DEFAULT_ALPHAS: tuple[float, ...] = tuple(round(0.05 * k, 2) for k in range(1, 20))
APM_IOU_THRESHOLDS: tuple[float, ...] = (0.3, 0.4, 0.5, 0.6, 0.7)
APM_METEOR_THRESHOLDS: tuple[float, ...] = (0.0, 0.05, 0.1, 0.15, 0.2)

# Matching objective: estimated association strength, with IoU as tie-break.
_TIE_EPS = 1e-7

KNOWN_CAP_METRICS = ("meteor", "cider", "exact", "external")


def validate_alphas(alphas: Sequence[float]) -> tuple[float, ...]:
    alphas = tuple(float(a) for a in alphas)
    if not alphas:
        raise ValidationError("alpha grid must be non-empty")
    if any(not (0.0 < a < 1.0) for a in alphas):
        raise ValidationError("alphas must lie in (0, 1)")
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValidationError("alphas must be strictly increasing")
    return alphas


@dataclass(frozen=True)
class ScorerConfig:
    """Which caption sub-metrics feed CapA, and how CapA treats the grid."""

    metrics: tuple[str, ...] = ("meteor", "cider")
    external_scores: Mapping[tuple[str, int, int], float] | None = None
    capa_alpha: float | None = None  # None: integrate over the alpha grid

    def __post_init__(self) -> None:
        if not self.metrics:
            raise ValidationError("at least one caption sub-metric is required")
        unknown = [m for m in self.metrics if m not in KNOWN_CAP_METRICS]
        if unknown:
            raise ValidationError(f"unknown caption sub-metrics: {unknown}")
        if "external" in self.metrics and self.external_scores is None:
            raise ValidationError("external sub-metric enabled but no scores supplied")

    @property
    def divisor(self) -> int:
        return len(self.metrics)


@dataclass
class MatchSet:
    """Per-frame bijective prediction/ground-truth matching at one threshold."""

    video_id: str
    alpha: float
    pairs_by_frame: list[list[tuple[int, int]]]  # (pred_track_id, gt_track_id)
    fp_by_frame: list[list[int]]  # unmatched pred track ids
    fn_by_frame: list[list[int]]  # unmatched gt track ids
    pred_track_sizes: dict[int, int]
    gt_track_sizes: dict[int, int]

    @property
    def tp(self) -> int:
        return sum(len(p) for p in self.pairs_by_frame)

    @property
    def fp(self) -> int:
        return sum(len(p) for p in self.fp_by_frame)

    @property
    def fn(self) -> int:
        return sum(len(p) for p in self.fn_by_frame)


class _VideoPrep:
    """Per-frame similarity structure plus pass-1 association strengths."""

    def __init__(self, pred: VideoRecord, gt: VideoRecord):
        if pred.video_id != gt.video_id:
            raise ValidationError(
                f"video ids differ: {pred.video_id!r} vs {gt.video_id!r}"
            )
        self.video_id = gt.video_id
        self.num_frames = gt.num_frames
        self.pred_tracks = list(pred.trajectories)
        self.gt_tracks = list(gt.trajectories)
        self.pred_ids = [t.track_id for t in self.pred_tracks]
        self.gt_ids = [t.track_id for t in self.gt_tracks]
        n_pred, n_gt = len(self.pred_tracks), len(self.gt_tracks)

        self.frame_gt: list[np.ndarray] = []
        self.frame_pred: list[np.ndarray] = []
        self.frame_sim: list[np.ndarray] = []
        gt_by_frame = gt.detections_by_frame()
        pred_by_frame = pred.detections_by_frame()
        gt_index = {tid: k for k, tid in enumerate(self.gt_ids)}
        pred_index = {tid: k for k, tid in enumerate(self.pred_ids)}

        self.gt_count = np.zeros(n_gt)
        self.pred_count = np.zeros(n_pred)
        potential = np.zeros((n_gt, n_pred))
        for frame in range(self.num_frames):
            gt_here = gt_by_frame[frame] if frame < len(gt_by_frame) else []
            pred_here = pred_by_frame[frame] if frame < len(pred_by_frame) else []
            g_idx = np.array([gt_index[tid] for tid, _ in gt_here], dtype=int)
            p_idx = np.array([pred_index[tid] for tid, _ in pred_here], dtype=int)
            sim = np.array(
                [[iou(gdet.box, pdet.box) for _, pdet in pred_here] for _, gdet in gt_here]
            ).reshape(len(gt_here), len(pred_here))
            self.frame_gt.append(g_idx)
            self.frame_pred.append(p_idx)
            self.frame_sim.append(sim)
            self.gt_count[g_idx] += 1
            self.pred_count[p_idx] += 1
            if len(gt_here) and len(pred_here):
                denom = sim.sum(0)[None, :] + sim.sum(1)[:, None] - sim
                sim_iou = np.divide(sim, denom, out=np.zeros_like(sim), where=denom > 1e-12)
                potential[np.ix_(g_idx, p_idx)] += sim_iou

        denom = self.gt_count[:, None] + self.pred_count[None, :] - potential
        self.global_ass = np.divide(
            potential, denom, out=np.zeros_like(potential), where=denom > 1e-12
        )


def _match_frame(sim: np.ndarray, ass: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Optimal frame matching: rows are gt, cols are pred; ineligible pairs excluded."""
    eligible = sim >= alpha
    if not eligible.any():
        empty = np.array([], dtype=int)
        return empty, empty
    score = np.where(eligible, ass + _TIE_EPS * sim, 0.0)
    rows, cols = linear_sum_assignment(-score)
    keep = eligible[rows, cols]
    return rows[keep], cols[keep]


@dataclass
class _VideoStats:
    """Per-video pooled statistics over the alpha grid (picklable)."""

    video_id: str
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    ass_iou_sum: np.ndarray
    cap_sum: np.ndarray
    tp_prime: np.ndarray
    gt_caption_count: int
    warnings: list[str] = field(default_factory=list)


def _effective_caption(det_caption: Caption | None, track_caption: Caption | None) -> Caption:
    cap = det_caption if det_caption is not None else track_caption
    return cap if cap is not None else Caption.from_text("")


class _PairScorer:
    """Caption pair scoring with memoization over token sequences."""

    def __init__(self, config: ScorerConfig, idf: IdfTable):
        self.config = config
        self.idf = idf
        self.cache: dict[tuple, float] = {}
        self.missing_external = 0

    def intrinsic(self, pred_cap: Caption, gt_cap: Caption) -> float:
        """Sum of the non-external sub-metric scores for one pair."""
        key = (pred_cap.tokens, gt_cap.tokens)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        total = 0.0
        for name in self.config.metrics:
            if name == "meteor":
                total += meteor_lite(pred_cap, gt_cap)
            elif name == "cider":
                total += cider_pair(pred_cap, gt_cap, self.idf)
            elif name == "exact":
                total += exact_match(pred_cap, gt_cap)
        self.cache[key] = total
        return total

    def external(self, video_id: str, pred_obs_index: int, gt_track_id: int) -> float:
        scores = self.config.external_scores or {}
        value = scores.get((video_id, pred_obs_index, gt_track_id))
        if value is None:
            self.missing_external += 1
            return 0.0
        return float(value)


def _evaluate_video(
    pred: VideoRecord,
    gt: VideoRecord,
    alphas: tuple[float, ...],
    config: ScorerConfig,
    idf: IdfTable,
) -> _VideoStats:
    prep = _VideoPrep(pred, gt)
    n_alpha = len(alphas)
    n_gt, n_pred = len(prep.gt_ids), len(prep.pred_ids)
    alpha_arr = np.asarray(alphas)

    tp = np.zeros(n_alpha)
    fp = np.zeros(n_alpha)
    fn = np.zeros(n_alpha)
    mc = np.zeros((n_alpha, n_gt, n_pred))

    track_caps = [t.caption for t in prep.gt_tracks]
    gt_caption_count = sum(1 for c in track_caps if c is not None)
    needs_external = "external" in config.metrics
    has_det_caps = any(
        d.caption is not None for t in prep.pred_tracks for d in t.detections
    )
    slow_caption_path = gt_caption_count > 0 and (needs_external or has_det_caps)
    frame_bands: list[tuple[int, int, int, np.ndarray, np.ndarray]] = []

    for frame in range(prep.num_frames):
        g_idx = prep.frame_gt[frame]
        p_idx = prep.frame_pred[frame]
        sim = prep.frame_sim[frame]
        fn += len(g_idx)
        fp += len(p_idx)
        if len(g_idx) == 0 or len(p_idx) == 0:
            continue
        ass = prep.global_ass[np.ix_(g_idx, p_idx)]
        a = 0
        while a < n_alpha:
            rows, cols = _match_frame(sim, ass, alphas[a])
            if rows.size == 0:
                break  # stays empty for every higher threshold
            min_iou = sim[rows, cols].min()
            end = int(np.searchsorted(alpha_arr, min_iou, side="right") - 1)
            n_match = rows.size
            tp[a : end + 1] += n_match
            fp[a : end + 1] -= n_match
            fn[a : end + 1] -= n_match
            for r, c in zip(rows, cols):
                mc[a : end + 1, g_idx[r], p_idx[c]] += 1.0
            if slow_caption_path:
                frame_bands.append((frame, a, end, g_idx[rows], p_idx[cols]))
            a = end + 1

    denom = prep.gt_count[None, :, None] + prep.pred_count[None, None, :] - mc
    ass_iou = np.divide(mc, denom, out=np.zeros_like(mc), where=denom > 1e-12)
    ass_iou_sum = (mc * ass_iou).sum(axis=(1, 2))

    cap_sum = np.zeros(n_alpha)
    tp_prime = np.zeros(n_alpha)
    warnings: list[str] = []
    if gt_caption_count > 0:
        scorer = _PairScorer(config, idf)
        if not slow_caption_path:
            captioned = np.array([c is not None for c in track_caps])
            pair_mask = mc.sum(axis=0) > 0
            scores = np.zeros((n_gt, n_pred))
            for g in range(n_gt):
                if not captioned[g]:
                    continue
                for p in range(n_pred):
                    if pair_mask[g, p]:
                        pred_cap = _effective_caption(None, prep.pred_tracks[p].caption)
                        scores[g, p] = scorer.intrinsic(pred_cap, track_caps[g]) / config.divisor
            cap_mc = mc * captioned[None, :, None]
            cap_sum = (cap_mc * scores[None, :, :]).sum(axis=(1, 2))
            tp_prime = cap_mc.sum(axis=(1, 2))
        else:
            obs_index = _pred_observation_index(pred)
            det_by_frame_track = {
                (d.frame, t.track_id): d for t in prep.pred_tracks for d in t.detections
            }
            for frame, a, end, g_tracks, p_tracks in frame_bands:
                for g, p in zip(g_tracks, p_tracks):
                    gt_cap = track_caps[g]
                    if gt_cap is None:
                        continue
                    pred_track = prep.pred_tracks[p]
                    det = det_by_frame_track[(frame, pred_track.track_id)]
                    pred_cap = _effective_caption(det.caption, pred_track.caption)
                    total = scorer.intrinsic(pred_cap, gt_cap)
                    if needs_external:
                        total += scorer.external(
                            prep.video_id,
                            obs_index[(frame, pred_track.track_id)],
                            prep.gt_ids[g],
                        )
                    cap_sum[a : end + 1] += total / config.divisor
                    tp_prime[a : end + 1] += 1.0
        if scorer.missing_external:
            warnings.append(
                f"{prep.video_id}: {scorer.missing_external} matched pairs had no external score (scored 0)"
            )

    return _VideoStats(
        video_id=prep.video_id,
        tp=tp,
        fp=fp,
        fn=fn,
        ass_iou_sum=ass_iou_sum,
        cap_sum=cap_sum,
        tp_prime=tp_prime,
        gt_caption_count=gt_caption_count,
        warnings=warnings,
    )


def _pred_observation_index(pred: VideoRecord) -> dict[tuple[int, int], int]:
    """(frame, track_id) -> flat frame-major observation index."""
    return {
        (frame, track_id): k for k, (frame, track_id, _) in enumerate(pred.flatten())
    }


def match_at_alpha(pred: VideoRecord, gt: VideoRecord, alpha: float) -> MatchSet:
    """Bijective per-frame matching at a single localization threshold."""
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    prep = _VideoPrep(pred, gt)
    pairs_by_frame: list[list[tuple[int, int]]] = []
    fp_by_frame: list[list[int]] = []
    fn_by_frame: list[list[int]] = []
    for frame in range(prep.num_frames):
        g_idx = prep.frame_gt[frame]
        p_idx = prep.frame_pred[frame]
        sim = prep.frame_sim[frame]
        if len(g_idx) and len(p_idx):
            ass = prep.global_ass[np.ix_(g_idx, p_idx)]
            rows, cols = _match_frame(sim, ass, alpha)
        else:
            rows = cols = np.array([], dtype=int)
        matched_g = set(rows.tolist())
        matched_p = set(cols.tolist())
        pairs_by_frame.append(
            [(prep.pred_ids[p_idx[c]], prep.gt_ids[g_idx[r]]) for r, c in zip(rows, cols)]
        )
        fp_by_frame.append([prep.pred_ids[p] for k, p in enumerate(p_idx) if k not in matched_p])
        fn_by_frame.append([prep.gt_ids[g] for k, g in enumerate(g_idx) if k not in matched_g])
    return MatchSet(
        video_id=prep.video_id,
        alpha=alpha,
        pairs_by_frame=pairs_by_frame,
        fp_by_frame=fp_by_frame,
        fn_by_frame=fn_by_frame,
        pred_track_sizes={t.track_id: len(t) for t in prep.pred_tracks},
        gt_track_sizes={t.track_id: len(t) for t in prep.gt_tracks},
    )


def det_a(m: MatchSet) -> float:
    """|TP| / (|TP| + |FP| + |FN|); 1 on an empty video by convention."""
    total = m.tp + m.fp + m.fn
    return 1.0 if total == 0 else m.tp / total


def ass_a(
    m: MatchSet,
    pred_track_sizes: Mapping[int, int] | None = None,
    gt_track_sizes: Mapping[int, int] | None = None,
) -> float:
    """Mean association IoU over true positives; 1 when there are none."""
    pred_sizes = pred_track_sizes or m.pred_track_sizes
    gt_sizes = gt_track_sizes or m.gt_track_sizes
    mc: dict[tuple[int, int], int] = {}
    for pairs in m.pairs_by_frame:
        for pred_id, gt_id in pairs:
            mc[(pred_id, gt_id)] = mc.get((pred_id, gt_id), 0) + 1
    if not mc:
        return 1.0
    total = 0.0
    for (pred_id, gt_id), count in mc.items():
        total += count * (count / (gt_sizes[gt_id] + pred_sizes[pred_id] - count))
    return total / m.tp


def cap_a(
    m: MatchSet,
    pred: VideoRecord,
    gt: VideoRecord,
    config: ScorerConfig = ScorerConfig(),
    idf: IdfTable | None = None,
) -> float | None:
    """Mean caption score over caption-annotated true positives.

    Returns None when the ground truth carries no captions at all (CapA is
    undefined and the combined metric falls back to its caption-free form);
    returns 0.0 when captions exist but no true positive pair has one.
    """
    gt_tracks = {t.track_id: t for t in gt.trajectories}
    pred_tracks = {t.track_id: t for t in pred.trajectories}
    if all(t.caption is None for t in gt.trajectories):
        return None
    if idf is None:
        idf = IdfTable.build([t.caption for t in gt.trajectories if t.caption is not None])
    scorer = _PairScorer(config, idf)
    obs_index = _pred_observation_index(pred)
    det_lookup = {
        (d.frame, t.track_id): d for t in pred.trajectories for d in t.detections
    }
    total = 0.0
    count = 0
    for frame, pairs in enumerate(m.pairs_by_frame):
        for pred_id, gt_id in pairs:
            gt_cap = gt_tracks[gt_id].caption
            if gt_cap is None:
                continue
            det = det_lookup[(frame, pred_id)]
            pred_cap = _effective_caption(det.caption, pred_tracks[pred_id].caption)
            pair_total = scorer.intrinsic(pred_cap, gt_cap)
            if "external" in config.metrics:
                pair_total += scorer.external(m.video_id, obs_index[(frame, pred_id)], gt_id)
            total += pair_total / config.divisor
            count += 1
    return total / count if count else 0.0


@dataclass
class EvalReport:
    alphas: tuple[float, ...]
    det_a: np.ndarray
    ass_a: np.ndarray
    cap_a: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    tp_prime: np.ndarray
    det_a_mean: float
    ass_a_mean: float
    cap_a_mean: float | None
    hota: float
    chota: float
    capa_defined: bool
    cap_metrics: tuple[str, ...]
    cap_divisor: int
    capa_alpha: float | None
    per_video: dict[str, dict]
    warnings: list[str]

    def flat_summary(self) -> dict[str, object]:
        # Counts are reported at the threshold closest to 0.5.
        mid = min(range(len(self.alphas)), key=lambda k: abs(self.alphas[k] - 0.5))
        return {
            "chota": self.chota,
            "hota": self.hota,
            "det_a": self.det_a_mean,
            "ass_a": self.ass_a_mean,
            "cap_a": self.cap_a_mean if self.capa_defined else "undefined",
            "tp@0.5": int(self.tp[mid]),
            "fp@0.5": int(self.fp[mid]),
            "fn@0.5": int(self.fn[mid]),
            "tp_prime@0.5": int(self.tp_prime[mid]),
            "cap_metrics": "+".join(self.cap_metrics),
            "cap_divisor": self.cap_divisor,
            "num_videos": len(self.per_video),
            "num_warnings": len(self.warnings),
        }

    def to_dict(self) -> dict:
        return {
            "alphas": list(self.alphas),
            "per_alpha": {
                "det_a": self.det_a.tolist(),
                "ass_a": self.ass_a.tolist(),
                "cap_a": self.cap_a.tolist(),
                "tp": self.tp.tolist(),
                "fp": self.fp.tolist(),
                "fn": self.fn.tolist(),
                "tp_prime": self.tp_prime.tolist(),
            },
            "aggregate": {
                "det_a": self.det_a_mean,
                "ass_a": self.ass_a_mean,
                "cap_a": self.cap_a_mean,
                "hota": self.hota,
                "chota": self.chota,
            },
            "capa_defined": self.capa_defined,
            "cap_metrics": list(self.cap_metrics),
            "cap_divisor": self.cap_divisor,
            "capa_alpha": self.capa_alpha,
            "per_video": self.per_video,
            "warnings": self.warnings,
        }


def chota_from_components(det_a_value: float, ass_a_value: float, cap_a_value: float) -> float:
    """Cube root combination of the three aggregated accuracy components."""
    return float(np.cbrt(det_a_value * ass_a_value * cap_a_value))


def hota_from_components(det_a_value: float, ass_a_value: float) -> float:
    return float(np.sqrt(det_a_value * ass_a_value))


def _pair_records(
    preds: Sequence[VideoRecord], gts: Sequence[VideoRecord]
) -> tuple[list[tuple[VideoRecord, VideoRecord]], list[str]]:
    warnings = []
    pred_by_id = {r.video_id: r for r in preds}
    extra = set(pred_by_id) - {g.video_id for g in gts}
    if extra:
        warnings.append(f"predictions for unknown videos ignored: {sorted(extra)}")
    pairs = []
    for gt in gts:
        pred = pred_by_id.get(gt.video_id)
        if pred is None:
            warnings.append(f"no predictions for video {gt.video_id!r}; counting all-FN")
            pred = VideoRecord(video_id=gt.video_id, num_frames=gt.num_frames, trajectories=())
        pairs.append((pred, gt))
    return pairs, warnings


# Worker context for fork-based pools: records are inherited by the child
# processes instead of being pickled per task; only the small per-video
# statistics travel back.
_PARALLEL_CTX: dict = {}


def _eval_indexed(index: int) -> _VideoStats:
    pred, gt = _PARALLEL_CTX["pairs"][index]
    return _evaluate_video(
        pred, gt, _PARALLEL_CTX["alphas"], _PARALLEL_CTX["config"], _PARALLEL_CTX["idf"]
    )


def chota(
    preds: Sequence[VideoRecord],
    gts: Sequence[VideoRecord],
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    config: ScorerConfig = ScorerConfig(),
    jobs: int = 1,
) -> EvalReport:
    """Pooled CHOTA evaluation over a collection of videos.

    Counts are pooled globally per threshold (micro-averaging); aggregate
    components are the means over the grid and combine as
    CHOTA = (DetA * AssA * CapA)^(1/3), HOTA = sqrt(DetA * AssA).
    """
    alphas = validate_alphas(alphas)
    if config.capa_alpha is not None and config.capa_alpha not in alphas:
        raise ValidationError(
            f"capa_alpha {config.capa_alpha} must be one of the evaluated thresholds"
        )
    pairs, warnings = _pair_records(preds, gts)
    idf = IdfTable.build(
        [t.caption for _, gt in pairs for t in gt.trajectories if t.caption is not None]
    )
    if jobs > 1 and len(pairs) > 1:
        import multiprocessing as mp

        _PARALLEL_CTX.update(pairs=pairs, alphas=alphas, config=config, idf=idf)
        try:
            with mp.get_context("fork").Pool(processes=jobs) as pool:
                stats = pool.map(
                    _eval_indexed,
                    range(len(pairs)),
                    chunksize=max(1, len(pairs) // (jobs * 4)),
                )
        finally:
            _PARALLEL_CTX.clear()
    else:
        stats = [_evaluate_video(pred, gt, alphas, config, idf) for pred, gt in pairs]
    # Reduce in id order so results do not depend on input video order.
    stats.sort(key=lambda s: s.video_id)

    n_alpha = len(alphas)
    tp = np.zeros(n_alpha)
    fp = np.zeros(n_alpha)
    fn = np.zeros(n_alpha)
    ass_sum = np.zeros(n_alpha)
    cap_sum = np.zeros(n_alpha)
    tp_prime = np.zeros(n_alpha)
    gt_caption_total = 0
    per_video: dict[str, dict] = {}
    for s in stats:
        tp += s.tp
        fp += s.fp
        fn += s.fn
        ass_sum += s.ass_iou_sum
        cap_sum += s.cap_sum
        tp_prime += s.tp_prime
        gt_caption_total += s.gt_caption_count
        warnings.extend(s.warnings)
        v_total = s.tp + s.fp + s.fn
        v_det = np.where(v_total > 0, s.tp / np.maximum(v_total, 1), 1.0)
        v_ass = np.where(s.tp > 0, s.ass_iou_sum / np.maximum(s.tp, 1), 1.0)
        per_video[s.video_id] = {
            "det_a": float(v_det.mean()),
            "ass_a": float(v_ass.mean()),
            "cap_a": (
                float((s.cap_sum[s.tp_prime > 0] / s.tp_prime[s.tp_prime > 0]).mean())
                if (s.tp_prime > 0).any()
                else (0.0 if s.gt_caption_count else None)
            ),
            "tp@mid": float(s.tp[n_alpha // 2]),
        }

    total = tp + fp + fn
    det_arr = np.where(total > 0, tp / np.maximum(total, 1), 1.0)
    ass_arr = np.where(tp > 0, ass_sum / np.maximum(tp, 1), 1.0)
    capa_defined = gt_caption_total > 0
    cap_arr = np.where(tp_prime > 0, cap_sum / np.maximum(tp_prime, 1), 0.0)

    det_mean = float(det_arr.mean())
    ass_mean = float(ass_arr.mean())
    if capa_defined:
        if config.capa_alpha is not None:
            cap_mean = float(cap_arr[alphas.index(config.capa_alpha)])
        else:
            cap_mean = float(cap_arr.mean())
        chota_value = chota_from_components(det_mean, ass_mean, cap_mean)
    else:
        cap_mean = None
        chota_value = hota_from_components(det_mean, ass_mean)
        warnings.append("no ground-truth captions anywhere: CapA undefined, CHOTA falls back to HOTA")
    if not (tp > 0).all():
        warnings.append("AssA reported as 1.0 at thresholds with zero true positives (undefined)")

    return EvalReport(
        alphas=alphas,
        det_a=det_arr,
        ass_a=ass_arr,
        cap_a=cap_arr,
        tp=tp,
        fp=fp,
        fn=fn,
        tp_prime=tp_prime,
        det_a_mean=det_mean,
        ass_a_mean=ass_mean,
        cap_a_mean=cap_mean,
        hota=hota_from_components(det_mean, ass_mean),
        chota=chota_value,
        capa_defined=capa_defined,
        cap_metrics=config.metrics,
        cap_divisor=config.divisor,
        capa_alpha=config.capa_alpha,
        per_video=per_video,
        warnings=warnings,
    )


def average_precision(tp_flags: Sequence[bool], n_gt: int) -> float:
    """All-points interpolated AP from ranked true-positive flags."""
    if n_gt == 0:
        raise ValidationError("AP undefined without ground truth")
    if not len(tp_flags):
        return 0.0
    tp_cum = np.cumsum(np.asarray(tp_flags, dtype=float))
    ranks = np.arange(1, len(tp_flags) + 1)
    recalls = np.concatenate(([0.0], tp_cum / n_gt, [1.0]))
    precisions = np.concatenate(([0.0], tp_cum / ranks, [0.0]))
    for i in range(len(precisions) - 1, 0, -1):
        precisions[i - 1] = max(precisions[i - 1], precisions[i])
    steps = np.flatnonzero(recalls[1:] != recalls[:-1])
    return float(np.sum((recalls[steps + 1] - recalls[steps]) * precisions[steps + 1]))


@dataclass
class ApmReport:
    overall: float
    grid: np.ndarray  # (len(iou_thresholds), len(meteor_thresholds)) means
    iou_thresholds: tuple[float, ...]
    meteor_thresholds: tuple[float, ...]
    num_frames: int

    def to_dict(self) -> dict:
        return {
            "ap_m": self.overall,
            "grid": self.grid.tolist(),
            "iou_thresholds": list(self.iou_thresholds),
            "meteor_thresholds": list(self.meteor_thresholds),
            "num_frames": self.num_frames,
        }


def ap_m(
    preds: Sequence[VideoRecord],
    gts: Sequence[VideoRecord],
    iou_thresholds: Sequence[float] = APM_IOU_THRESHOLDS,
    meteor_thresholds: Sequence[float] = APM_METEOR_THRESHOLDS,
) -> ApmReport:
    """Frame-level average precision gated jointly on IoU and caption quality.

    Evaluated independently per frame: predictions are greedily matched in
    descending score order to unmatched ground truth passing both thresholds
    (highest IoU first), the all-points AP is averaged over the threshold
    grid, and frames containing at least one ground-truth box are averaged.
    Ground-truth objects without a caption accept any predicted caption
    (caption score pinned to 1).
    """
    iou_thresholds = tuple(iou_thresholds)
    meteor_thresholds = tuple(meteor_thresholds)
    pairs, _ = _pair_records(preds, gts)
    grid_sum = np.zeros((len(iou_thresholds), len(meteor_thresholds)))
    n_frames = 0
    meteor_cache: dict[tuple, float] = {}

    for pred, gt in pairs:
        gt_frames = gt.detections_by_frame()
        pred_frames = pred.detections_by_frame()
        gt_caps = {t.track_id: t.caption for t in gt.trajectories}
        pred_caps = {t.track_id: t.caption for t in pred.trajectories}
        for frame in range(gt.num_frames):
            gt_here = gt_frames[frame]
            if not gt_here:
                continue
            n_frames += 1
            pred_here = pred_frames[frame] if frame < len(pred_frames) else []
            order = sorted(range(len(pred_here)), key=lambda k: -pred_here[k][1].score)
            n_gt_here = len(gt_here)
            iou_mat = np.zeros((len(pred_here), n_gt_here))
            met_mat = np.zeros((len(pred_here), n_gt_here))
            for k, (p_tid, p_det) in enumerate(pred_here):
                p_cap = _effective_caption(p_det.caption, pred_caps.get(p_tid))
                for g, (g_tid, g_det) in enumerate(gt_here):
                    iou_mat[k, g] = iou(p_det.box, g_det.box)
                    g_cap = gt_caps.get(g_tid)
                    if g_cap is None:
                        met_mat[k, g] = 1.0
                    else:
                        key = (p_cap.tokens, g_cap.tokens)
                        if key not in meteor_cache:
                            meteor_cache[key] = meteor_lite(p_cap, g_cap)
                        met_mat[k, g] = meteor_cache[key]
            for i_t, t_iou in enumerate(iou_thresholds):
                for m_t, t_met in enumerate(meteor_thresholds):
                    taken = np.zeros(n_gt_here, dtype=bool)
                    flags = []
                    for k in order:
                        ok = (~taken) & (iou_mat[k] >= t_iou) & (met_mat[k] >= t_met)
                        cand = np.flatnonzero(ok)
                        if cand.size:
                            best = cand[np.argmax(iou_mat[k][cand])]
                            taken[best] = True
                            flags.append(True)
                        else:
                            flags.append(False)
                    grid_sum[i_t, m_t] += average_precision(flags, n_gt_here)

    if n_frames == 0:
        grid = np.full_like(grid_sum, np.nan)
        return ApmReport(
            overall=float("nan"),
            grid=grid,
            iou_thresholds=iou_thresholds,
            meteor_thresholds=meteor_thresholds,
            num_frames=0,
        )
    grid = grid_sum / n_frames
    return ApmReport(
        overall=float(grid.mean()),
        grid=grid,
        iou_thresholds=iou_thresholds,
        meteor_thresholds=meteor_thresholds,
        num_frames=n_frames,
    )


def grounding_ious(
    pred_boxes: Mapping[int, Box | None],
    pred_span: tuple[int, int],
    gt_boxes: Mapping[int, Box],
    gt_span: tuple[int, int],
) -> tuple[float, float, float]:
    """(sIoU, tIoU, vIoU) for one grounded query.

    Spans are inclusive frame intervals. sIoU averages the per-frame box IoU
    over the ground-truth span (a missing predicted box scores 0); tIoU is
    the span overlap ratio; vIoU sums box IoU over the span intersection,
    normalized by the span union size.
    """
    ps, pe = pred_span
    gs, ge = gt_span
    if ps > pe or gs > ge:
        raise ValidationError("spans must satisfy start <= end")

    gt_len = ge - gs + 1
    s_total = 0.0
    for frame in range(gs, ge + 1):
        if frame not in gt_boxes:
            raise ValidationError(f"ground truth box missing for frame {frame} in its own span")
        box = pred_boxes.get(frame)
        s_total += iou(box, gt_boxes[frame]) if box is not None else 0.0
    s_iou = s_total / gt_len

    inter_start, inter_end = max(ps, gs), min(pe, ge)
    inter = max(0, inter_end - inter_start + 1)
    union = (pe - ps + 1) + gt_len - inter
    t_iou = inter / union if union else 0.0

    v_total = 0.0
    for frame in range(inter_start, inter_end + 1):
        box = pred_boxes.get(frame)
        v_total += iou(box, gt_boxes[frame]) if box is not None else 0.0
    v_iou = v_total / union if union else 0.0
    return (s_iou, t_iou, v_iou)
