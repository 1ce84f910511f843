#!/usr/bin/env python3
"""Regenerate the committed golden fixtures.

The synthetic files are frozen outputs of the deterministic generator; any
change to the generator that alters them must be deliberate, and this script
is how the frozen copies get refreshed.

Run from the repository root:  python tools/make_golden_fixtures.py
"""

import json
from pathlib import Path

from densevoc import formats, synth

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

# Published component triples (percent scale): det_a, ass_a, cap_a -> chota.
COMPONENT_TRIPLES = [
    {"name": "table2_row6", "det_a": 64.2, "ass_a": 65.9, "cap_a": 39.1, "chota": 54.9},
    {"name": "table2_row5", "det_a": 64.4, "ass_a": 65.9, "cap_a": 38.4, "chota": 54.6},
    {"name": "table3_row8", "det_a": 51.4, "ass_a": 59.6, "cap_a": 9.8, "chota": 31.1},
    {"name": "table4_row8", "det_a": 65.8, "ass_a": 70.4, "cap_a": 39.7, "chota": 56.9},
]


def main():
    FIXTURES.mkdir(exist_ok=True)

    (FIXTURES / "component_triples.json").write_text(
        json.dumps(COMPONENT_TRIPLES, indent=2) + "\n"
    )
    (FIXTURES / "table2_row6_components.json").write_text(
        json.dumps(COMPONENT_TRIPLES[0], indent=2) + "\n"
    )

    # 20-video clean fixture for the perfect-prediction identity check.
    gts, _ = synth.generate(
        synth.SynthConfig(seed=20, num_videos=20, frames_per_video=20, objects_per_video=4)
    )
    formats.save_dataset(gts, FIXTURES / "synth20_gt.json")

    # Perturbed golden pair pinning the generator stream for seed 42.
    cfg = synth.SynthConfig(
        seed=42,
        num_videos=3,
        frames_per_video=12,
        objects_per_video=3,
        box_jitter_sigma=1.5,
        drop_rate=0.1,
        false_positive_rate=0.1,
        id_switch_rate=0.1,
        caption_corruption_rate=0.3,
    )
    gt42, pred42 = synth.generate(cfg)
    formats.save_dataset(gt42, FIXTURES / "golden_seed42_gt.json")
    formats.save_dataset(pred42, FIXTURES / "golden_seed42_pred.json")

    for name in (
        "component_triples.json",
        "table2_row6_components.json",
        "synth20_gt.json",
        "golden_seed42_gt.json",
        "golden_seed42_pred.json",
    ):
        size = (FIXTURES / name).stat().st_size
        print(f"wrote fixtures/{name} ({size} bytes)")


if __name__ == "__main__":
    main()
