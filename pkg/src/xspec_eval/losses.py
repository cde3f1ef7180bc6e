"""Evaluation of the bidirectional-conversion composite loss and its terms.

Nothing here trains anything. The adversarial term is the two-sided value
function (sum of four log-likelihood terms) exactly as written; which side
minimizes or maximizes it is a training-loop concern. Expectations become
means over whatever batch or patch grid the caller supplies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ShapeError
from .tensorcore import as_tensor, euclidean, l1_mean

LOG_EPS = 1e-7
EMBEDDING_DIM = 128


@dataclass(frozen=True)
class LossWeights:
    lambda_cyc: float = 10.0
    lambda_syn: float = 30.0
    lambda_idr: float = 10.0

    def __post_init__(self):
        for name in ("lambda_cyc", "lambda_syn", "lambda_idr"):
            if not getattr(self, name) >= 0:
                raise ArgumentError(f"{name} must be >= 0")


@dataclass(frozen=True, eq=False)
class DiscriminatorProbe:
    """Discriminator outputs: scalars or patch-probability maps in [0, 1]."""

    p_real_ir: np.ndarray
    p_fake_ir: np.ndarray
    p_real_vis: np.ndarray
    p_fake_vis: np.ndarray

    def __post_init__(self):
        for name in ("p_real_ir", "p_fake_ir", "p_real_vis", "p_fake_vis"):
            p = as_tensor(getattr(self, name))
            if np.any(np.isnan(p)) or np.any(p < 0) or np.any(p > 1):
                raise ArgumentError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, p)


@dataclass(frozen=True, eq=False)
class ConversionBundle:
    """Originals ``v``/``i``, one-step conversions ``g_v`` = G(v), ``f_i`` = F(i),
    and round trips ``fgv`` = F(G(v)), ``gfi`` = G(F(i))."""

    v: np.ndarray
    i: np.ndarray
    g_v: np.ndarray
    f_i: np.ndarray
    fgv: np.ndarray
    gfi: np.ndarray

    FIELDS = ("v", "i", "g_v", "f_i", "fgv", "gfi")

    def __post_init__(self):
        shapes = set()
        for name in self.FIELDS:
            t = as_tensor(getattr(self, name))
            object.__setattr__(self, name, t)
            shapes.add(t.shape)
        if len(shapes) != 1:
            raise ShapeError(f"conversion bundle tensors differ in shape: {sorted(shapes)}")


def _mean_log(p: np.ndarray) -> float:
    return float(np.mean(np.log(np.clip(p, LOG_EPS, 1.0 - LOG_EPS))))


def adversarial_loss(d: DiscriminatorProbe) -> float:
    """Sum of the four per-patch-averaged log terms (natural log, clamped at 1e-7)."""
    return (
        _mean_log(d.p_real_ir)
        + _mean_log(1.0 - d.p_fake_ir)
        + _mean_log(d.p_real_vis)
        + _mean_log(1.0 - d.p_fake_vis)
    )


def cycle_loss(b: ConversionBundle) -> float:
    return l1_mean(b.fgv, b.v) + l1_mean(b.gfi, b.i)


def syn_loss(b: ConversionBundle) -> float:
    """One-step conversions against the round trip landing in the same band."""
    return l1_mean(b.f_i, b.fgv) + l1_mean(b.g_v, b.gfi)


def _embedding(e, name: str) -> np.ndarray:
    e = np.asarray(e, dtype=np.float64).reshape(-1)
    if e.size != EMBEDDING_DIM:
        raise ShapeError(f"{name} must have {EMBEDDING_DIM} entries, got {e.size}")
    if not np.all(np.isfinite(e)):
        raise ArgumentError(f"{name} has non-finite entries")
    return e


def idr_loss(e_vis, e_ir) -> float:
    """Euclidean distance between two 128-d identity embeddings."""
    return euclidean(_embedding(e_vis, "e_vis"), _embedding(e_ir, "e_ir"))


def composite_loss(adv: float, cyc: float, syn: float, idr: float,
                   w: LossWeights = LossWeights()) -> float:
    for name, value in (("cyc", cyc), ("syn", syn), ("idr", idr)):
        if not value >= 0:
            raise ArgumentError(f"{name} loss must be >= 0, got {value}")
    return adv + w.lambda_cyc * cyc + w.lambda_syn * syn + w.lambda_idr * idr


def evaluate_losses(probe: DiscriminatorProbe, bundle: ConversionBundle,
                    e_vis, e_ir, w: LossWeights = LossWeights()) -> dict:
    """All four terms plus the weighted total, keyed as in the CLI JSON output."""
    l_gan = adversarial_loss(probe)
    l_cyc = cycle_loss(bundle)
    l_syn = syn_loss(bundle)
    l_idr = idr_loss(e_vis, e_ir)
    return {
        "l_gan": l_gan,
        "l_cyc": l_cyc,
        "l_syn": l_syn,
        "l_idr": l_idr,
        "total": composite_loss(l_gan, l_cyc, l_syn, l_idr, w),
    }
