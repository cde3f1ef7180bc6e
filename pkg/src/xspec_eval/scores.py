"""Matching-score sets: data model, CSV ingestion, normalization and synthesis.

Scores are similarities throughout (higher means more likely genuine). A trial
is genuine exactly when probe and gallery carry the same subject label.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ArgumentError, DegenerateInputError, ParseError

SCORE_COLUMNS = ("probe_id", "probe_subject", "gallery_id", "gallery_subject", "score")
NORMALIZATIONS = ("minmax", "zscore", "none")


class ScoreTrial(NamedTuple):
    probe_id: str
    probe_subject: str
    gallery_id: str
    gallery_subject: str
    score: float

    @property
    def genuine(self) -> bool:
        return self.probe_subject == self.gallery_subject


@dataclass(frozen=True, eq=False)
class ScoreSet:
    """Column-oriented container of matching trials.

    Identity columns are tuples of strings; ``scores`` is a read-only float64
    array aligned with them.
    """

    probe_ids: tuple
    probe_subjects: tuple
    gallery_ids: tuple
    gallery_subjects: tuple
    scores: np.ndarray

    def __post_init__(self):
        scores = np.array(self.scores, dtype=np.float64).reshape(-1)
        n = scores.size
        for name in ("probe_ids", "probe_subjects", "gallery_ids", "gallery_subjects"):
            col = tuple(str(v) for v in getattr(self, name))
            if len(col) != n:
                raise ArgumentError(f"column {name} has {len(col)} entries, scores has {n}")
            object.__setattr__(self, name, col)
        if not np.all(np.isfinite(scores)):
            raise ArgumentError("scores must be finite")
        scores.flags.writeable = False
        object.__setattr__(self, "scores", scores)
        mask = np.fromiter(
            (p == g for p, g in zip(self.probe_subjects, self.gallery_subjects)),
            dtype=bool, count=n,
        )
        mask.flags.writeable = False
        object.__setattr__(self, "genuine_mask", mask)

    @classmethod
    def from_trials(cls, trials) -> "ScoreSet":
        trials = list(trials)
        cols = list(zip(*trials)) if trials else [()] * 5
        return cls(*cols[:4], scores=np.array(cols[4], dtype=np.float64))

    @classmethod
    def from_arrays(cls, genuine, impostor) -> "ScoreSet":
        """Build a set from bare genuine/impostor score arrays with synthetic labels."""
        genuine = np.asarray(genuine, dtype=np.float64).reshape(-1)
        impostor = np.asarray(impostor, dtype=np.float64).reshape(-1)
        probe_ids, probe_subj, gallery_ids, gallery_subj = [], [], [], []
        for k in range(genuine.size):
            probe_ids.append(f"gp{k}")
            gallery_ids.append(f"gg{k}")
            probe_subj.append(f"g{k}")
            gallery_subj.append(f"g{k}")
        for k in range(impostor.size):
            probe_ids.append(f"ip{k}")
            gallery_ids.append(f"ig{k}")
            probe_subj.append(f"ia{k}")
            gallery_subj.append(f"ib{k}")
        return cls(probe_ids, probe_subj, gallery_ids, gallery_subj,
                   np.concatenate([genuine, impostor]))

    def __len__(self) -> int:
        return self.scores.size

    def __iter__(self) -> Iterator[ScoreTrial]:
        for row in zip(self.probe_ids, self.probe_subjects, self.gallery_ids,
                       self.gallery_subjects, self.scores.tolist()):
            yield ScoreTrial(*row)

    @property
    def genuine(self) -> np.ndarray:
        return self.scores[self.genuine_mask]

    @property
    def impostor(self) -> np.ndarray:
        return self.scores[~self.genuine_mask]

    @property
    def n_genuine(self) -> int:
        return int(self.genuine_mask.sum())

    @property
    def n_impostor(self) -> int:
        return len(self) - self.n_genuine

    @property
    def keys(self) -> list[tuple[str, str]]:
        return list(zip(self.probe_ids, self.gallery_ids))

    def with_scores(self, scores) -> "ScoreSet":
        """Same trials, new score column."""
        return ScoreSet(self.probe_ids, self.probe_subjects, self.gallery_ids,
                        self.gallery_subjects, scores)

    def require_both_classes(self) -> None:
        if self.n_genuine < 1 or self.n_impostor < 1:
            raise DegenerateInputError(
                f"need at least one genuine and one impostor trial "
                f"(have {self.n_genuine} genuine, {self.n_impostor} impostor)"
            )


def _parse_rows(lines, source: str) -> ScoreSet:
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{source}: empty file") from None
    if tuple(h.strip() for h in header) != SCORE_COLUMNS:
        raise ParseError(f"{source}: row 1: header must be {','.join(SCORE_COLUMNS)}")
    trials = []
    for rownum, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(SCORE_COLUMNS):
            raise ParseError(f"{source}: row {rownum}: expected 5 columns, got {len(row)}")
        try:
            score = float(row[4])
        except ValueError:
            raise ParseError(f"{source}: row {rownum}: non-numeric score {row[4]!r}") from None
        if not math.isfinite(score):
            raise ParseError(f"{source}: row {rownum}: score must be finite")
        trials.append(ScoreTrial(row[0], row[1], row[2], row[3], score))
    if not trials:
        raise ParseError(f"{source}: no trials")
    return ScoreSet.from_trials(trials)


def load_scores(path) -> ScoreSet:
    """Read a score CSV (``probe_id,probe_subject,gallery_id,gallery_subject,score``)."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            return _parse_rows(fh, str(path))
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None


def format_float(x: float) -> str:
    """Shortest repr that round-trips the float64 exactly."""
    return repr(float(x))


def scores_to_csv(s: ScoreSet) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCORE_COLUMNS)
    for t in s:
        writer.writerow([t.probe_id, t.probe_subject, t.gallery_id, t.gallery_subject,
                         format_float(t.score)])
    return buf.getvalue()


def save_scores(path, s: ScoreSet) -> None:
    Path(path).write_text(scores_to_csv(s), encoding="utf-8")


def normalize(s: ScoreSet, method: str = "none") -> ScoreSet:
    """Normalize scores using statistics pooled over all trials.

    ``minmax`` maps affinely onto [0, 1]; ``zscore`` centers to mean 0 and
    unit sample (n-1) standard deviation; ``none`` returns the set unchanged.
    """
    if method not in NORMALIZATIONS:
        raise ArgumentError(f"unknown normalization {method!r}; choose from {NORMALIZATIONS}")
    if method == "none":
        return s
    x = s.scores
    if method == "minmax":
        lo, hi = float(x.min()), float(x.max())
        if not hi > lo:
            raise DegenerateInputError("minmax normalization needs max > min")
        out = (x - lo) / (hi - lo)
        # pin the extremes exactly so repeated minmax is idempotent
        out[x == lo] = 0.0
        out[x == hi] = 1.0
        return s.with_scores(out)
    if x.size < 2:
        raise DegenerateInputError("zscore normalization needs at least two scores")
    sd = float(np.std(x, ddof=1))
    if not sd > 0:
        raise DegenerateInputError("zscore normalization needs a nonzero standard deviation")
    return s.with_scores((x - x.mean()) / sd)


def distance_to_similarity(s: ScoreSet) -> ScoreSet:
    """Map distances d >= 0 to similarities 1 / (1 + d)."""
    if np.any(s.scores < 0):
        raise ArgumentError("distance scores must be >= 0")
    return s.with_scores(1.0 / (1.0 + s.scores))


def synth_scores(seed: int, n_genuine: int, n_impostor: int,
                 genuine_mean: float, genuine_sd: float,
                 impostor_mean: float, impostor_sd: float) -> ScoreSet:
    """Draw a seeded Gaussian genuine/impostor score set clipped to [0, 1].

    Genuine scores are drawn first, then impostor scores, from one
    ``numpy.random.default_rng(seed)`` stream owned by this call.
    """
    if n_genuine < 1 or n_impostor < 1:
        raise ArgumentError("n_genuine and n_impostor must be >= 1")
    if genuine_sd < 0 or impostor_sd < 0:
        raise ArgumentError("standard deviations must be >= 0")
    rng = np.random.default_rng(seed)
    gen = rng.normal(genuine_mean, genuine_sd, size=n_genuine)
    imp = rng.normal(impostor_mean, impostor_sd, size=n_impostor)
    return ScoreSet.from_arrays(np.clip(gen, 0.0, 1.0), np.clip(imp, 0.0, 1.0))
