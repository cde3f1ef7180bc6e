"""Score-level fusion of visible and infrared matching scores.

SAWF (self-adaptive weighted fusion) picks the modality with the larger
d-prime, gives it its share of the summed GARs as weight, and hands the
remainder to the other modality. Equal d-prime values (within a tolerance)
fall back to equal weights. The fixed baseline rules combine the two scores
of each trial elementwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, ArgumentError
from .metrics import d_prime, gar_at_far, roc_curve
from .scores import ScoreSet

DEFAULT_REFERENCE_FAR = 1e-3
DEFAULT_TIE_EPSILON = 1e-9
BASELINE_RULES = (
    "maximum", "minimum", "arithmetic_average", "geometric_average",
    "median", "product", "sum",
)


@dataclass(frozen=True)
class ModalityQuality:
    gar: float
    d_prime: float

    def __post_init__(self):
        if math.isnan(self.gar) or math.isnan(self.d_prime):
            raise ArgumentError("modality quality must not contain NaN")
        if not (math.isfinite(self.gar) and math.isfinite(self.d_prime)):
            raise ArgumentError("modality quality must be finite")
        if not 0.0 <= self.gar <= 1.0:
            raise ArgumentError(f"gar must be a fraction in [0, 1], got {self.gar}")


@dataclass(frozen=True)
class FusionWeights:
    w1: float
    w2: float

    @classmethod
    def from_visible(cls, w1: float) -> "FusionWeights":
        return cls(w1, 1.0 - w1)

    @classmethod
    def from_infrared(cls, w2: float) -> "FusionWeights":
        return cls(1.0 - w2, w2)


def modality_quality(s: ScoreSet, reference_far: float = DEFAULT_REFERENCE_FAR) -> ModalityQuality:
    """GAR at ``reference_far`` and d-prime of a single-modality score set."""
    return ModalityQuality(gar_at_far(roc_curve(s), reference_far), d_prime(s))


def sawf_weights(q_vis: ModalityQuality, q_ir: ModalityQuality,
                 tie_epsilon: float = DEFAULT_TIE_EPSILON) -> FusionWeights:
    """SAWF weights (w1 for visible, w2 for infrared)."""
    values = (q_vis.gar, q_vis.d_prime, q_ir.gar, q_ir.d_prime, tie_epsilon)
    if any(math.isnan(v) for v in values):
        raise ArgumentError("sawf_weights: NaN input")
    if tie_epsilon < 0:
        raise ArgumentError("tie_epsilon must be >= 0")
    g_total = q_vis.gar + q_ir.gar
    if q_vis.d_prime > q_ir.d_prime + tie_epsilon:
        if g_total == 0:
            return FusionWeights(0.5, 0.5)
        return FusionWeights.from_visible(q_vis.gar / g_total)
    if q_ir.d_prime > q_vis.d_prime + tie_epsilon:
        if g_total == 0:
            return FusionWeights(0.5, 0.5)
        return FusionWeights.from_infrared(q_ir.gar / (q_ir.gar + q_vis.gar))
    return FusionWeights(0.5, 0.5)


def _align(scores_vis: ScoreSet, scores_ir: ScoreSet) -> np.ndarray:
    """IR scores reordered to match the visible set's (probe_id, gallery_id) keys."""
    ir_index = {}
    for pos, key in enumerate(scores_ir.keys):
        if key in ir_index:
            raise AlignmentError(f"duplicate trial key {key} in infrared scores")
        ir_index[key] = pos
    if len(ir_index) != len(scores_vis):
        # surface the first key present on one side only
        vis_keys = set(scores_vis.keys)
        for key in scores_vis.keys:
            if key not in ir_index:
                raise AlignmentError(f"trial key {key} missing from infrared scores")
        for key in scores_ir.keys:
            if key not in vis_keys:
                raise AlignmentError(f"trial key {key} missing from visible scores")
        raise AlignmentError("duplicate trial keys in visible scores")
    order = np.empty(len(scores_vis), dtype=np.intp)
    for pos, key in enumerate(scores_vis.keys):
        try:
            order[pos] = ir_index[key]
        except KeyError:
            raise AlignmentError(f"trial key {key} missing from infrared scores") from None
    return scores_ir.scores[order]


def fuse_weighted(w: FusionWeights, scores_vis: ScoreSet, scores_ir: ScoreSet) -> ScoreSet:
    """Per-trial ``w1 * vis + w2 * ir``, aligned by trial key."""
    ir = _align(scores_vis, scores_ir)
    return scores_vis.with_scores(_convex(scores_vis.scores, ir, w.w1, w.w2))


def _convex(a: np.ndarray, b: np.ndarray, w1: float, w2: float) -> np.ndarray:
    fused = w1 * a + w2 * b
    # rounding must not push a convex combination outside its operands
    return np.clip(fused, np.minimum(a, b), np.maximum(a, b))


def fuse_baseline(rule: str, scores_vis: ScoreSet, scores_ir: ScoreSet) -> ScoreSet:
    if rule not in BASELINE_RULES:
        raise ArgumentError(f"unknown fusion rule {rule!r}; choose from {BASELINE_RULES}")
    a = scores_vis.scores
    b = _align(scores_vis, scores_ir)
    if rule in ("geometric_average", "product") and (np.any(a < 0) or np.any(b < 0)):
        raise ArgumentError(f"{rule} requires nonnegative scores")
    if rule == "maximum":
        out = np.maximum(a, b)
    elif rule == "minimum":
        out = np.minimum(a, b)
    elif rule in ("arithmetic_average", "median"):
        # the median of two values is their midpoint
        out = _convex(a, b, 0.5, 0.5)
    elif rule == "geometric_average":
        out = np.sqrt(a * b)
    elif rule == "product":
        out = a * b
    else:
        out = a + b
    return scores_vis.with_scores(out)


def fuse_sawf(scores_vis: ScoreSet, scores_ir: ScoreSet,
              reference_far: float = DEFAULT_REFERENCE_FAR,
              tie_epsilon: float = DEFAULT_TIE_EPSILON):
    """Measure both modalities, derive SAWF weights and fuse.

    Returns ``(fused, weights, q_vis, q_ir)``.
    """
    q_vis = modality_quality(scores_vis, reference_far)
    q_ir = modality_quality(scores_ir, reference_far)
    w = sawf_weights(q_vis, q_ir, tie_epsilon)
    return fuse_weighted(w, scores_vis, scores_ir), w, q_vis, q_ir
