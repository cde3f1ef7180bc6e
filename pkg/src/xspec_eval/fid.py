"""Frechet Inception Distance between two feature populations.

Features are taken as given (any extractor, any dimension). The matrix
square root of the covariance product is evaluated in the symmetric form
``(S_x^1/2 S_y S_x^1/2)^1/2``, which has the same trace as ``(S_x S_y)^1/2``
but only ever needs square roots of symmetric PSD matrices.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, NumericDomainError, ParseError, ShapeError

SYMMETRY_TOL = 1e-8
EIGEN_FLOOR = -1e-8
FID_CLAMP = -1e-6


@dataclass(frozen=True, eq=False)
class GaussianStats:
    mu: np.ndarray
    sigma: np.ndarray


def as_features(data) -> np.ndarray:
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"feature set must be an n x d matrix, got shape {x.shape}")
    n, d = x.shape
    if d < 1:
        raise ShapeError("feature dimension must be >= 1")
    if n < 2:
        raise DegenerateInputError(f"need at least 2 samples for a covariance, got {n}")
    if not np.all(np.isfinite(x)):
        raise NumericDomainError("feature set contains non-finite entries")
    return x


def gaussian_stats(features) -> GaussianStats:
    """Column means and (n-1)-normalized covariance, explicitly symmetrized."""
    x = as_features(features)
    mu = x.mean(axis=0)
    centered = x - mu
    sigma = centered.T @ centered / (x.shape[0] - 1)
    sigma = 0.5 * (sigma + sigma.T)
    return GaussianStats(mu, sigma)


def sqrtm_psd(a) -> np.ndarray:
    """Principal square root of a symmetric positive semidefinite matrix.

    Eigenvalues in ``[-1e-8, 0)`` are treated as rounding noise and clamped
    to zero; anything more negative, or an asymmetry above 1e-8, raises
    ``NumericDomainError``.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"sqrtm_psd needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericDomainError("matrix contains non-finite entries")
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > SYMMETRY_TOL:
        raise NumericDomainError(f"matrix is not symmetric (max |a - a^T| = {asym:.3g})")
    evals, evecs = np.linalg.eigh(0.5 * (a + a.T))
    if evals.size and evals.min() < EIGEN_FLOOR:
        raise NumericDomainError(f"matrix is not PSD (min eigenvalue {evals.min():.3g})")
    root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T
    return 0.5 * (root + root.T)


def fid_from_stats(x: GaussianStats, y: GaussianStats) -> float:
    if x.mu.shape != y.mu.shape:
        raise ShapeError(f"feature dimensions differ: {x.mu.size} vs {y.mu.size}")
    diff = x.mu - y.mu
    root_x = sqrtm_psd(x.sigma)
    middle = root_x @ y.sigma @ root_x
    covmean = sqrtm_psd(0.5 * (middle + middle.T))
    value = float(diff @ diff + np.trace(x.sigma) + np.trace(y.sigma) - 2.0 * np.trace(covmean))
    if value < 0.0:
        if value < FID_CLAMP:
            raise NumericDomainError(f"FID evaluated to {value:.3g}, below the -1e-6 noise window")
        value = 0.0
    return value


def fid(x, y) -> float:
    """FID between two n x d feature matrices with the same d."""
    x = as_features(x)
    y = as_features(y)
    if x.shape[1] != y.shape[1]:
        raise ShapeError(f"feature dimensions differ: {x.shape[1]} vs {y.shape[1]}")
    return fid_from_stats(gaussian_stats(x), gaussian_stats(y))


def load_features(path) -> tuple[list[str], np.ndarray]:
    """Read a feature CSV (``sample_id,f0,...,f{d-1}``); returns ids and the matrix."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        d = len(header) - 1
        if d < 1 or header[0] != "sample_id" or header[1:] != [f"f{j}" for j in range(d)]:
            raise ParseError(f"{path}: row 1: header must be sample_id,f0,...,f{{d-1}}")
        ids, rows = [], []
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise ParseError(f"{path}: row {rownum}: expected {d + 1} columns, got {len(row)}")
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError:
                raise ParseError(f"{path}: row {rownum}: non-numeric feature value") from None
            ids.append(row[0])
    if not rows:
        raise ParseError(f"{path}: no samples")
    return ids, np.array(rows, dtype=np.float64)


def save_features(path, data, ids=None) -> None:
    data = np.asarray(data, dtype=np.float64)
    if ids is None:
        ids = [f"s{k}" for k in range(data.shape[0])]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_id"] + [f"f{j}" for j in range(data.shape[1])])
        for sid, row in zip(ids, data.tolist()):
            writer.writerow([sid] + [repr(v) for v in row])
