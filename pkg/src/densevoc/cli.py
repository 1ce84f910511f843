"""Command-line surface.

Exit codes: 0 success, 1 a --gate threshold failed (or a verification table
has failures), 2 malformed or inconsistent input. Missing videos and similar
semantic gaps degrade to warnings with defined metric behavior so sweeps
survive; schema violations do not.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import aggregate as agg
from . import assoc, formats, ground, losses, metrics, synth
from .core import Caption, ValidationError, VideoRecord


def _jobs_default() -> int:
    try:
        return max(1, int(os.environ.get("DENSEVOC_JOBS", "1")))
    except ValueError:
        return 1


def _parse_alphas(text: str) -> tuple[float, ...]:
    return metrics.validate_alphas(tuple(float(a) for a in text.split(",")))


def _parse_gates(gates: list[str]) -> list[tuple[str, float]]:
    parsed = []
    for gate in gates:
        name, _, value = gate.partition(":")
        if not value:
            raise ValidationError(f"gate must look like metric:min, got {gate!r}")
        parsed.append((name.strip(), float(value)))
    return parsed


def _apply_gates(gates: list[tuple[str, float]], values: dict[str, float]) -> int:
    failed = False
    for name, minimum in gates:
        if name not in values:
            raise ValidationError(f"unknown gate metric {name!r}; known: {sorted(values)}")
        value = values[name]
        ok = value is not None and value >= minimum
        print(f"gate {name} >= {minimum}: {'PASS' if ok else 'FAIL'} (value {value})")
        if not ok:
            failed = True
    return 1 if failed else 0


def _scorer_config(args) -> metrics.ScorerConfig:
    names = tuple(m.strip() for m in args.cap_metrics.split(",") if m.strip())
    external = None
    if "external" in names:
        if not args.external_scores:
            raise ValidationError("--cap-metrics external requires --external-scores FILE")
        external = formats.load_external_scores(args.external_scores)
    capa_alpha = None
    if args.capa_alpha != "integrate":
        mode, _, value = args.capa_alpha.partition(":")
        if mode != "single" or not value:
            raise ValidationError("--capa-alpha must be 'integrate' or 'single:<alpha>'")
        capa_alpha = float(value)
    return metrics.ScorerConfig(metrics=names, external_scores=external, capa_alpha=capa_alpha)


def cmd_eval_chota(args) -> int:
    gts = formats.load_dataset(args.gt, strict=args.strict)
    preds = formats.load_dataset(args.pred, strict=args.strict)
    config = _scorer_config(args)
    report = metrics.chota(
        preds, gts, alphas=_parse_alphas(args.alphas), config=config, jobs=args.jobs
    )
    summary = report.flat_summary()
    for key, value in summary.items():
        print(f"{key}={value}")
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if args.out:
        formats.write_json(report.to_dict(), args.out)
        with open(str(args.out) + ".summary", "w") as fh:
            for key, value in summary.items():
                fh.write(f"{key}={value}\n")
    gate_values = {
        "chota": report.chota,
        "hota": report.hota,
        "det_a": report.det_a_mean,
        "ass_a": report.ass_a_mean,
        "cap_a": report.cap_a_mean,
    }
    return _apply_gates(_parse_gates(args.gate), gate_values)


def cmd_eval_apm(args) -> int:
    gts = formats.load_dataset(args.gt, strict=args.strict)
    preds = formats.load_dataset(args.pred, strict=args.strict)
    report = metrics.ap_m(
        preds,
        gts,
        iou_thresholds=tuple(float(t) for t in args.iou_thresholds.split(",")),
        meteor_thresholds=tuple(float(t) for t in args.meteor_thresholds.split(",")),
    )
    print(f"ap_m={report.overall}")
    print(f"frames={report.num_frames}")
    if args.out:
        formats.write_json(report.to_dict(), args.out)
    return _apply_gates(_parse_gates(args.gate), {"ap_m": report.overall})


def cmd_track_assign(args) -> int:
    matrix = formats.load_matrix(args.matrix)
    if not isinstance(matrix, assoc.AssocMatrix):
        raise ValidationError(f"{args.matrix} holds a feature matrix, not an association matrix")
    ids = assoc.assign_identities(matrix, theta=args.theta)
    print(f"observations={len(ids)} tracks={len(set(ids.ids.tolist()))}")
    if args.out:
        formats.write_json({"ids": [int(i) for i in ids.ids]}, args.out)
    return 0


def cmd_track_iou(args) -> int:
    from dataclasses import replace

    records = formats.load_dataset(args.pred, strict=args.strict)
    out_records = []
    for record in records:
        frames = [[det for _, det in dets] for dets in record.detections_by_frame()]
        ids = assoc.iou_tracker(frames, match_thresh=args.thresh)
        flat = []
        k = 0
        for frame, dets in enumerate(frames):
            for det in dets:
                new_id = int(ids.ids[k])
                flat.append((frame, new_id, replace(det, track_id=new_id)))
                k += 1
        out_records.append(VideoRecord.regroup(record.video_id, record.num_frames, flat))
    if args.out:
        formats.save_dataset(out_records, args.out)
    print(f"videos={len(out_records)}")
    return 0


def cmd_aggregate(args) -> int:
    features = formats.load_matrix(args.features)
    if isinstance(features, assoc.AssocMatrix):
        raise ValidationError(f"{args.features} holds an association matrix, not features")
    if args.mode == "soft":
        matrix = formats.load_matrix(args.matrix)
        if not isinstance(matrix, assoc.AssocMatrix):
            raise ValidationError(f"{args.matrix} holds a feature matrix, not an association matrix")
        out = agg.soft_aggregate(assoc.preprocess(matrix), features.values)
        if args.out:
            formats.save_matrix(features.video_id, features.frame_of, out, args.out, kind="features")
        print(f"rows={out.shape[0]} dim={out.shape[1]}")
        return 0
    if args.ids:
        import json

        ids = assoc.IdentityAssignment(
            ids=np.asarray(json.loads(open(args.ids).read())["ids"], dtype=int)
        )
    else:
        if not args.matrix:
            raise ValidationError("hard aggregation needs --ids or --matrix")
        matrix = formats.load_matrix(args.matrix)
        if not isinstance(matrix, assoc.AssocMatrix):
            raise ValidationError(f"{args.matrix} holds a feature matrix, not an association matrix")
        ids = assoc.assign_identities(matrix, theta=args.theta)
    result = agg.hard_aggregate(features.values, ids, features.frame_of, m=args.m)
    obj = {
        "video_id": features.video_id,
        "m": args.m,
        "tracks": [
            {"track_id": tid, "length": len(vec), "values": [float(v) for v in vec]}
            for tid, vec in sorted(result.items())
        ],
    }
    if args.out:
        formats.write_json(obj, args.out)
    print(f"tracks={len(result)}")
    return 0


def cmd_ground(args) -> int:
    records = formats.load_dataset(args.pred, strict=args.strict)
    by_id = {r.video_id: r for r in records}
    queries = formats.load_queries(args.queries)
    per_frame, per_track = formats.load_likelihoods(args.likelihoods)

    results = []
    sious, tious, vious = [], [], []
    for query in queries:
        video = by_id.get(query["video_id"])
        if video is None:
            print(f"warning: no predictions for video {query['video_id']!r}", file=sys.stderr)
            continue
        candidates: dict[int, list[tuple]] = {}
        track_of: dict[tuple[str, int, int], int] = {}
        for frame, dets in enumerate(video.detections_by_frame()):
            candidates[frame] = [(det.box, det.score) for _, det in dets]
            for k, (track_id, _) in enumerate(dets):
                track_of[(video.video_id, frame, k)] = track_id
        scorer = ground.TableScorer(
            per_frame=per_frame, per_track=per_track, mode=args.mode, track_of=track_of
        )
        result, (s_iou, t_iou, v_iou) = ground.ground_and_score(
            video.video_id,
            candidates,
            query["boxes"],
            query["span"],
            scorer,
            Caption.from_text(query["text"]),
            query_id=query["query_id"],
        )
        sious.append(s_iou)
        tious.append(t_iou)
        vious.append(v_iou)
        results.append(
            {
                "video_id": video.video_id,
                "query_id": query["query_id"],
                "s_iou": s_iou,
                "t_iou": t_iou,
                "v_iou": v_iou,
                "selections": {
                    str(frame): {"index": index, "box": list(box.as_tuple())}
                    for frame, (index, box) in sorted(result.selections.items())
                },
                "values": {str(f): vals for f, vals in sorted(result.values.items())},
            }
        )
    if args.out:
        formats.write_json(results, args.out)
    if sious:
        print(f"queries={len(sious)}")
        print(f"s_iou={float(np.mean(sious))}")
        print(f"t_iou={float(np.mean(tious))}")
        print(f"v_iou={float(np.mean(vious))}")
    return 0


def cmd_synth(args) -> int:
    cfg = synth.SynthConfig(
        seed=args.seed,
        num_videos=args.num_videos,
        frames_per_video=args.frames,
        objects_per_video=args.objects,
        box_jitter_sigma=args.box_jitter,
        drop_rate=args.drop_rate,
        false_positive_rate=args.fp_rate,
        id_switch_rate=args.id_switch_rate,
        caption_corruption_rate=args.caption_corruption_rate,
    )
    gts, preds = synth.generate(cfg)
    formats.save_dataset(gts, args.out_gt)
    formats.save_dataset(preds, args.out_pred)
    print(f"videos={len(gts)} gt={args.out_gt} pred={args.out_pred}")
    return 0


def cmd_convert_flat(args) -> int:
    record = formats.load_flat_records(
        args.flat,
        video_id=args.video_id,
        num_frames=args.num_frames,
        one_based_frames=args.one_based,
    )
    formats.save_dataset([record], args.out)
    n_dets = sum(len(t) for t in record.trajectories)
    print(f"tracks={len(record.trajectories)} detections={n_dets} out={args.out}")
    return 0


def cmd_verify_losses(args) -> int:
    rng = np.random.default_rng(7)
    seeds = args.seeds
    checks = []

    def check_heatmap(r: np.random.Generator) -> float:
        y = r.uniform(0.1, 0.9, size=(5, 5))
        y_gt = np.where(r.random((5, 5)) < 0.3, 1.0, r.uniform(0.0, 0.95, size=(5, 5)))
        return losses.finite_diff_check(
            lambda v: losses.heatmap_loss(v, y_gt, n=3),
            lambda v: losses.heatmap_loss_grad(v, y_gt, n=3),
            y,
        )

    def check_assoc(r: np.random.Generator) -> float:
        a = r.uniform(0.1, 0.9, size=(4, 4))
        a_gt = (r.random((4, 4)) < 0.5).astype(float)
        return losses.finite_diff_check(
            lambda v: losses.assoc_loss(v, a_gt),
            lambda v: losses.assoc_loss_grad(v, a_gt),
            a,
        )

    def check_caption(r: np.random.Generator) -> float:
        logits = r.normal(size=(5, 7))
        targets = r.integers(0, 7, size=5)
        return losses.finite_diff_check(
            lambda v: losses.caption_loss(v, targets, smoothing=0.1),
            lambda v: losses.caption_loss_grad(v, targets, smoothing=0.1),
            logits,
        )

    def check_roi_cls(r: np.random.Generator) -> float:
        logits = r.normal(size=2)
        label = int(r.integers(0, 2))
        return losses.finite_diff_check(
            lambda v: losses.roi_cls_loss(v, label),
            lambda v: losses.roi_cls_loss_grad(v, label),
            logits,
        )

    for name, fn in (
        ("heatmap_loss", check_heatmap),
        ("assoc_loss", check_assoc),
        ("caption_loss", check_caption),
        ("roi_cls_loss", check_roi_cls),
    ):
        worst = max(fn(np.random.default_rng(rng.integers(2**32))) for _ in range(seeds))
        ok = worst <= 1e-4
        checks.append(ok)
        print(f"{name:<14} max_rel_err={worst:.3e} over {seeds} seeds: {'PASS' if ok else 'FAIL'}")
    return 0 if all(checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="densevoc",
        description="Dense video object captioning evaluation and trajectory toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_eval(p):
        p.add_argument("gt", help="ground-truth dataset file")
        p.add_argument("pred", help="prediction dataset file")
        p.add_argument("--strict", action="store_true", help="reject unknown fields")
        p.add_argument("--out", default=None, help="write the full report here")
        p.add_argument("--gate", action="append", default=[], metavar="METRIC:MIN")

    p = sub.add_parser("eval-chota", help="tracking + captioning evaluation")
    add_common_eval(p)
    p.add_argument("--alphas", default=",".join(str(a) for a in metrics.DEFAULT_ALPHAS))
    p.add_argument("--cap-metrics", default="meteor,cider", help="comma list of meteor,cider,exact,external")
    p.add_argument("--capa-alpha", default="integrate", help="'integrate' or 'single:<alpha>'")
    p.add_argument("--external-scores", default=None, help="sidecar score file")
    p.add_argument("--jobs", type=int, default=_jobs_default())
    p.set_defaults(func=cmd_eval_chota)

    p = sub.add_parser("eval-apm", help="frame-level average precision")
    add_common_eval(p)
    p.add_argument("--iou-thresholds", default=",".join(str(t) for t in metrics.APM_IOU_THRESHOLDS))
    p.add_argument(
        "--meteor-thresholds", default=",".join(str(t) for t in metrics.APM_METEOR_THRESHOLDS)
    )
    p.set_defaults(func=cmd_eval_apm)

    p = sub.add_parser("track-assign", help="identities from an association matrix")
    p.add_argument("matrix")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_track_assign)

    p = sub.add_parser("track-iou", help="baseline IoU linker over a detection file")
    p.add_argument("pred")
    p.add_argument("--thresh", type=float, default=0.5)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_track_iou)

    p = sub.add_parser("aggregate", help="trajectory features from per-observation features")
    p.add_argument("features", help="feature matrix file")
    p.add_argument("--matrix", default=None, help="association matrix file")
    p.add_argument("--ids", default=None, help="identity file from track-assign")
    p.add_argument("--mode", choices=("soft", "hard"), default="soft")
    p.add_argument("--m", type=int, default=6, help="frames sampled per track in hard mode")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("ground", help="weighted-likelihood spatial grounding")
    p.add_argument("pred")
    p.add_argument("--queries", required=True)
    p.add_argument("--likelihoods", required=True)
    p.add_argument("--mode", choices=("per-frame", "per-track"), default="per-frame")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("synth", help="deterministic synthetic scenario files")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--num-videos", type=int, default=4)
    p.add_argument("--frames", type=int, default=30)
    p.add_argument("--objects", type=int, default=4)
    p.add_argument("--box-jitter", type=float, default=0.0)
    p.add_argument("--drop-rate", type=float, default=0.0)
    p.add_argument("--fp-rate", type=float, default=0.0)
    p.add_argument("--id-switch-rate", type=float, default=0.0)
    p.add_argument("--caption-corruption-rate", type=float, default=0.0)
    p.add_argument("--out-gt", required=True)
    p.add_argument("--out-pred", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser(
        "convert-flat", help="flat frame,id,x,y,w,h[,score] rows to a dataset file"
    )
    p.add_argument("flat", help="CSV-style flat records")
    p.add_argument("--video-id", required=True)
    p.add_argument("--num-frames", type=int, default=None, help="default: max frame + 1")
    p.add_argument("--one-based", action="store_true", help="frames in the input start at 1")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert_flat)

    p = sub.add_parser("verify-losses", help="finite-difference gradient table")
    p.add_argument("--seeds", type=int, default=100)
    p.set_defaults(func=cmd_verify_losses)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (formats.FormatError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
