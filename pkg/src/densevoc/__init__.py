"""Dense video object captioning: evaluation metrics and trajectory formation."""

from .aggregate import hard_aggregate, hard_sample_indices, soft_aggregate
from .assoc import (
    AssocMatrix,
    IdentityAssignment,
    assign_identities,
    build_gt_association,
    iou_tracker,
    preprocess,
)
from .capmetrics import (
    CaptionScore,
    IdfTable,
    cider_pair,
    exact_match,
    meteor_lite,
    score_pair,
    stem,
)
from .core import (
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
from .ground import GroundingResult, TableScorer, UniformScorer, ground_and_score, select_boxes
from .losses import (
    LossConfig,
    assoc_loss,
    caption_loss,
    finite_diff_check,
    giou_loss,
    heatmap_loss,
    roi_cls_loss,
    roi_reg_loss,
)
from .metrics import (
    DEFAULT_ALPHAS,
    ApmReport,
    EvalReport,
    MatchSet,
    ScorerConfig,
    ap_m,
    ass_a,
    cap_a,
    chota,
    chota_from_components,
    det_a,
    grounding_ious,
    hota_from_components,
    match_at_alpha,
)
from .synth import SynthConfig, generate

__version__ = "0.1.0"
