"""Trajectory features: association-weighted averaging vs. sampled concatenation."""

import numpy as np

from densevoc import (
    AssocMatrix,
    IdentityAssignment,
    hard_aggregate,
    hard_sample_indices,
    preprocess,
    soft_aggregate,
)

# Two observations of one object across two frames, with feature rows that
# differ so the mixing is visible.
matrix = preprocess(
    AssocMatrix(values=np.array([[1.0, 0.5], [0.5, 1.0]]), frame_of=np.array([0, 1]))
)
features = np.array([[0.0, 0.0], [3.0, 3.0]])

# Soft aggregation row-normalizes the association weights and averages:
# row 0 mixes (2/3, 1/3), row 1 mixes (1/3, 2/3).
print("soft aggregate:\n", soft_aggregate(matrix, features))

# Hard aggregation picks m evenly spaced member frames and concatenates.
# Short tracks pass through; a 10-frame track sampled at m=6 keeps the
# endpoints and rounds the interior positions.
print("indices L=3,  m=6:", hard_sample_indices(3, 6))
print("indices L=10, m=6:", hard_sample_indices(10, 6))

ids = IdentityAssignment(ids=np.array([1, 1, 2]))
frame_of = np.array([0, 1, 0])
rows = np.array([[1.0, 1.0], [3.0, 3.0], [9.0, 9.0]])
for track_id, vector in hard_aggregate(rows, ids, frame_of, m=6).items():
    print(f"track {track_id}: {vector}")
