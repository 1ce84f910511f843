"""Independent brute-force oracles the production code is checked against.

Everything here is written as plain straight-line Python against the stated
definitions: no scipy assignment solver, no banding or caching tricks, no
shared helpers with the library beyond the basic domain types.
"""

from __future__ import annotations

import math

from densevoc.core import VideoRecord


def box_iou(a, b) -> float:
    ix = max(0.0, min(a.x2, b.x2) - max(a.x1, b.x1))
    iy = max(0.0, min(a.y2, b.y2) - max(a.y1, b.y1))
    inter = ix * iy
    area_a = (a.x2 - a.x1) * (a.y2 - a.y1)
    area_b = (b.x2 - b.x1) * (b.y2 - b.y1)
    union = area_a + area_b - inter
    return inter / union if union > 0 else 0.0


def greedy_assignment_oracle(values, frame_of, theta):
    """Identity assignment replayed directly from the greedy pseudocode.

    Plain lists; symmetrize by max, zero same-frame pairs, unit diagonal,
    binarize, then loop: argmax row size (lowest index wins), keep one
    member per frame by highest real score (lowest index wins), assign a
    fresh id, erase merged rows and columns.
    """
    m = len(frame_of)
    a = [[0.0] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            a[i][j] = max(values[i][j], values[j][i])
    for i in range(m):
        for j in range(m):
            if i != j and frame_of[i] == frame_of[j]:
                a[i][j] = 0.0
        a[i][i] = 1.0
    binary = [[a[i][j] >= theta for j in range(m)] for i in range(m)]
    ids = [0] * m
    id_count = 0
    while any(any(row) for row in binary):
        sizes = [sum(row) for row in binary]
        best_row = 0
        for i in range(1, m):
            if sizes[i] > sizes[best_row]:
                best_row = i
        members = [j for j in range(m) if binary[best_row][j]]
        kept = {}
        for j in members:
            frame = frame_of[j]
            if frame not in kept or a[best_row][j] > a[best_row][kept[frame]]:
                kept[frame] = j
        merged = list(kept.values())
        id_count += 1
        for j in merged:
            ids[j] = id_count
            for k in range(m):
                binary[j][k] = False
                binary[k][j] = False
    return ids


def _partial_matchings(n_gt: int, n_pred: int, eligible):
    """Every injective partial map from gt indices to pred indices."""

    def recurse(g, used):
        if g == n_gt:
            yield []
            return
        for rest in recurse(g + 1, used):
            yield rest
        for p in range(n_pred):
            if p not in used and eligible[g][p]:
                for rest in recurse(g + 1, used | {p}):
                    yield [(g, p)] + rest

    yield from recurse(0, frozenset())


def hota_oracle(pred: VideoRecord, gt: VideoRecord, alphas):
    """Per-alpha (DetA, AssA) by exhaustive enumeration of frame matchings.

    Objective per frame: maximize the sum of pass-1 association strength plus
    1e-7 times IoU over matched pairs, pairs under the threshold ineligible.
    """
    gt_ids = [t.track_id for t in gt.trajectories]
    pred_ids = [t.track_id for t in pred.trajectories]
    gt_pos = {tid: k for k, tid in enumerate(gt_ids)}
    pred_pos = {tid: k for k, tid in enumerate(pred_ids)}

    frames = []
    for frame in range(gt.num_frames):
        g_here = []
        for track in gt.trajectories:
            for det in track.detections:
                if det.frame == frame:
                    g_here.append((track.track_id, det.box))
        p_here = []
        for track in pred.trajectories:
            for det in track.detections:
                if det.frame == frame:
                    p_here.append((track.track_id, det.box))
        frames.append((g_here, p_here))

    gt_count = [0] * len(gt_ids)
    pred_count = [0] * len(pred_ids)
    potential = [[0.0] * len(pred_ids) for _ in gt_ids]
    for g_here, p_here in frames:
        for tid, _ in g_here:
            gt_count[gt_pos[tid]] += 1
        for tid, _ in p_here:
            pred_count[pred_pos[tid]] += 1
        if not g_here or not p_here:
            continue
        sim = [[box_iou(gb, pb) for _, pb in p_here] for _, gb in g_here]
        for i in range(len(g_here)):
            for j in range(len(p_here)):
                denom = (
                    sum(sim[i][k] for k in range(len(p_here)))
                    + sum(sim[k][j] for k in range(len(g_here)))
                    - sim[i][j]
                )
                if denom > 1e-12:
                    potential[gt_pos[g_here[i][0]]][pred_pos[p_here[j][0]]] += sim[i][j] / denom

    ass = [[0.0] * len(pred_ids) for _ in gt_ids]
    for g in range(len(gt_ids)):
        for p in range(len(pred_ids)):
            denom = gt_count[g] + pred_count[p] - potential[g][p]
            if denom > 1e-12:
                ass[g][p] = potential[g][p] / denom

    results = []
    for alpha in alphas:
        tp = fp = fn = 0
        mc: dict[tuple[int, int], int] = {}
        for g_here, p_here in frames:
            fn += len(g_here)
            fp += len(p_here)
            if not g_here or not p_here:
                continue
            sim = [[box_iou(gb, pb) for _, pb in p_here] for _, gb in g_here]
            eligible = [[sim[i][j] >= alpha for j in range(len(p_here))] for i in range(len(g_here))]
            best_value = -1.0
            best = []
            for matching in _partial_matchings(len(g_here), len(p_here), eligible):
                value = sum(
                    ass[gt_pos[g_here[i][0]]][pred_pos[p_here[j][0]]] + 1e-7 * sim[i][j]
                    for i, j in matching
                )
                if value > best_value:
                    best_value = value
                    best = matching
            tp += len(best)
            fp -= len(best)
            fn -= len(best)
            for i, j in best:
                key = (g_here[i][0], p_here[j][0])
                mc[key] = mc.get(key, 0) + 1
        det = tp / (tp + fp + fn) if (tp + fp + fn) else 1.0
        if tp:
            total = 0.0
            for (g_tid, p_tid), count in mc.items():
                denom = gt_count[gt_pos[g_tid]] + pred_count[pred_pos[p_tid]] - count
                total += count * (count / denom)
            assa = total / tp
        else:
            assa = 1.0
        results.append((det, assa))
    return results


def detection_ap_oracle(pred_dets, gt_boxes, iou_thresh) -> float:
    """Classic single-frame detection AP with greedy score-ordered matching.

    pred_dets: list of (box, score); gt_boxes: list of boxes. All-points
    interpolation with the precision envelope.
    """
    order = sorted(range(len(pred_dets)), key=lambda k: -pred_dets[k][1])
    taken = [False] * len(gt_boxes)
    flags = []
    for k in order:
        box = pred_dets[k][0]
        best = -1
        best_iou = -1.0
        for g, gt_box in enumerate(gt_boxes):
            if taken[g]:
                continue
            value = box_iou(box, gt_box)
            if value >= iou_thresh and value > best_iou:
                best_iou = value
                best = g
        if best >= 0:
            taken[best] = True
            flags.append(1)
        else:
            flags.append(0)
    if not flags:
        return 0.0
    recalls = [0.0]
    precisions = [0.0]
    tp_cum = 0
    for rank, flag in enumerate(flags, start=1):
        tp_cum += flag
        recalls.append(tp_cum / len(gt_boxes))
        precisions.append(tp_cum / rank)
    recalls.append(1.0)
    precisions.append(0.0)
    for i in range(len(precisions) - 1, 0, -1):
        precisions[i - 1] = max(precisions[i - 1], precisions[i])
    ap = 0.0
    for i in range(len(recalls) - 1):
        if recalls[i + 1] != recalls[i]:
            ap += (recalls[i + 1] - recalls[i]) * precisions[i + 1]
    return ap


def argmax_selection_oracle(candidates, nlls):
    """Exhaustive per-frame argmax of score * exp(-nll), lowest index on ties."""
    out = {}
    for frame, cands in candidates.items():
        if not cands:
            continue
        best = None
        best_value = None
        for k, ((_, score), nll) in enumerate(zip(cands, nlls[frame])):
            value = score * math.exp(-nll)
            if best_value is None or value > best_value:
                best_value = value
                best = k
        out[frame] = best
    return out
