"""Evaluation and fusion toolkit for cross-spectral face matching."""

from .errors import (
    AlignmentError,
    ArgumentError,
    DegenerateInputError,
    NumericDomainError,
    ParseError,
    ShapeError,
    UnsupportedLayerError,
    XspecError,
)
from .fid import fid, gaussian_stats, sqrtm_psd
from .fusion import (
    FusionWeights,
    ModalityQuality,
    fuse_baseline,
    fuse_sawf,
    fuse_weighted,
    modality_quality,
    sawf_weights,
)
from .losses import (
    ConversionBundle,
    DiscriminatorProbe,
    LossWeights,
    adversarial_loss,
    composite_loss,
    cycle_loss,
    idr_loss,
    syn_loss,
)
from .metrics import BiometricReport, RocCurve, auc, d_prime, eer, evaluate, gar_at_far, roc_curve
from .netspec import (
    LayerSpec,
    NetworkSpec,
    builtin,
    empirical_receptive_field,
    infer_shapes,
    param_count,
    receptive_field,
)
from .scores import (
    ScoreSet,
    ScoreTrial,
    distance_to_similarity,
    load_scores,
    normalize,
    save_scores,
    synth_scores,
)

__version__ = "0.1.0"
