"""Forming trajectories from an association matrix, and the IoU baseline.

The association matrix scores every pair of per-frame observations; the
greedy assignment repeatedly peels off the longest remaining track.
"""

import numpy as np

from densevoc import (
    AssocMatrix,
    Box,
    Detection,
    assign_identities,
    build_gt_association,
    iou_tracker,
    preprocess,
)
from densevoc.core import Trajectory, VideoRecord

# Four observations: two per frame across two frames. Observation 0 and 2
# look alike (score 0.9), observation 1 and 3 look alike (score 0.8).
values = np.full((4, 4), 0.1)
np.fill_diagonal(values, 1.0)
values[0, 2] = values[2, 0] = 0.9
values[1, 3] = values[3, 1] = 0.8
matrix = AssocMatrix(values=values, frame_of=np.array([0, 0, 1, 1]))

# Preprocessing symmetrizes, zeroes same-frame pairs, and pins the diagonal.
print("preprocessed:\n", preprocess(matrix).values)

# At threshold 0.5 both cross-frame links survive: two tracks of length 2.
print("ids at theta=0.50:", assign_identities(matrix, theta=0.5).ids)

# At 0.95 only the diagonal survives: every observation becomes a singleton.
print("ids at theta=0.95:", assign_identities(matrix, theta=0.95).ids)

# Ground-truth association matrices come from per-frame IoU matching against
# annotated trajectories: 1 where two observations hit the same track.
gt = VideoRecord(
    video_id="demo",
    num_frames=2,
    trajectories=(
        Trajectory(1, (Detection(0, Box(0, 0, 10, 10)), Detection(1, Box(2, 0, 12, 10)))),
    ),
)
pred_boxes = [[Box(0, 0, 10, 10)], [Box(2, 0, 12, 10)]]
print("gt association:\n", build_gt_association(pred_boxes, gt).values)

# The online IoU tracker is the floor baseline: link frame to frame, no
# re-identification. A static box keeps its id; a teleporting one does not.
static = [[Detection(f, Box(0, 0, 10, 10))] for f in range(4)]
jumpy = [[Detection(f, Box(100.0 * f, 0, 100.0 * f + 10, 10))] for f in range(4)]
print("static ids:", iou_tracker(static, match_thresh=0.5).ids)
print("jumpy ids: ", iou_tracker(jumpy, match_thresh=0.5).ids)
