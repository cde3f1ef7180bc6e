"""ROC construction and the GAR@FAR / EER / d-prime / AUC metric suite.

A trial is accepted when ``score >= threshold``. Rates are fractions in
[0, 1]; percentages only appear at presentation time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DegenerateInputError
from .scores import ScoreSet, format_float

DEFAULT_FAR_POINTS = (1e-1, 1e-3)


@dataclass(frozen=True, eq=False)
class RocCurve:
    """ROC polyline ordered by decreasing threshold.

    ``far`` and ``gar`` are both non-decreasing along the arrays. Consecutive
    points may share a FAR value (a vertical step caused by genuine scores
    alone); the curve runs from the ``(0, 0)`` sentinel at threshold ``+inf``
    to ``(1, 1)`` at the lowest observed score.
    """

    thresholds: np.ndarray
    far: np.ndarray
    gar: np.ndarray

    def __len__(self):
        return self.far.size

    def points(self):
        return list(zip(self.thresholds.tolist(), self.far.tolist(), self.gar.tolist()))

    def to_csv(self) -> str:
        lines = ["threshold,far,gar"]
        for t, f, g in self.points():
            lines.append(f"{format_float(t)},{format_float(f)},{format_float(g)}")
        return "\n".join(lines) + "\n"


def roc_curve(s: ScoreSet) -> RocCurve:
    s.require_both_classes()
    gen = np.sort(s.genuine)
    imp = np.sort(s.impostor)
    thresholds = np.unique(s.scores)[::-1]
    # counts of scores >= t for each threshold t
    n_gen_acc = gen.size - np.searchsorted(gen, thresholds, side="left")
    n_imp_acc = imp.size - np.searchsorted(imp, thresholds, side="left")
    thresholds = np.concatenate([[np.inf], thresholds])
    far = np.concatenate([[0.0], n_imp_acc / imp.size])
    gar = np.concatenate([[0.0], n_gen_acc / gen.size])
    for arr in (thresholds, far, gar):
        arr.flags.writeable = False
    return RocCurve(thresholds, far, gar)


def gar_at_far(r: RocCurve, far_level: float) -> float:
    """GAR at ``far_level``, linearly interpolated in FAR along the curve.

    Where the curve has a vertical step at exactly ``far_level`` the upper
    GAR is returned.
    """
    if not (0.0 < far_level <= 1.0):
        raise ArgumentError(f"far_level must be in (0, 1], got {far_level}")
    far, gar = r.far, r.gar
    at = far == far_level
    if at.any():
        return float(gar[at].max())
    hi = int(np.searchsorted(far, far_level, side="right"))
    lo = hi - 1
    f0, f1 = far[lo], far[hi]
    g0, g1 = gar[lo], gar[hi]
    return float(g0 + (far_level - f0) * (g1 - g0) / (f1 - f0))


def eer(r: RocCurve) -> float:
    """Equal error rate where FAR == FRR on the interpolated curve."""
    # FAR - FRR = far + gar - 1, non-decreasing from -1 to +1 along the curve
    diff = r.far + r.gar - 1.0
    k = int(np.argmax(diff >= 0.0))
    if diff[k] == 0.0 or k == 0:
        return float(r.far[k])
    d0, d1 = diff[k - 1], diff[k]
    alpha = -d0 / (d1 - d0)
    return float(r.far[k - 1] + alpha * (r.far[k] - r.far[k - 1]))


def d_prime(s: ScoreSet) -> float:
    """Separation |mu_g - mu_i| / sqrt((var_g + var_i) / 2) with sample variances."""
    gen, imp = s.genuine, s.impostor
    if gen.size < 2 or imp.size < 2:
        raise DegenerateInputError(
            f"d-prime needs >= 2 genuine and >= 2 impostor scores "
            f"(have {gen.size}, {imp.size})"
        )
    diff = abs(float(gen.mean()) - float(imp.mean()))
    pooled = (float(np.var(gen, ddof=1)) + float(np.var(imp, ddof=1))) / 2.0
    if pooled == 0.0:
        if diff == 0.0:
            return 0.0
        raise DegenerateInputError("d-prime is infinite: both classes have zero variance and different means")
    return diff / math.sqrt(pooled)


def auc(r: RocCurve) -> float:
    """Trapezoidal area under GAR(FAR) on [0, 1]."""
    df = np.diff(r.far)
    return float(np.sum(df * (r.gar[1:] + r.gar[:-1]) / 2.0))


@dataclass
class BiometricReport:
    gar_at_far: dict[float, float]
    eer: float
    d_prime: float
    auc: float
    n_genuine: int
    n_impostor: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "n_genuine": self.n_genuine,
            "n_impostor": self.n_impostor,
            "eer": self.eer,
            "d_prime": self.d_prime,
            "auc": self.auc,
            "gar_at_far": {format_float(k): v for k, v in sorted(self.gar_at_far.items())},
        }
        out.update(self.extra)
        return out


def evaluate(s: ScoreSet, far_points=DEFAULT_FAR_POINTS) -> tuple[BiometricReport, RocCurve]:
    """Compute the full metric suite for one score set."""
    r = roc_curve(s)
    report = BiometricReport(
        gar_at_far={float(f): gar_at_far(r, f) for f in far_points},
        eer=eer(r),
        d_prime=d_prime(s),
        auc=auc(r),
        n_genuine=s.n_genuine,
        n_impostor=s.n_impostor,
    )
    return report, r
