"""Classification of query maps against an eigen model.

The match score is ``1 - min(w) / mean(w)`` over the per-class out-weights:
1 when the query coincides with one class, 0 when every class is equally far.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigenmodel import EigenModel
from .errors import DegenerateWeightsError, DimensionError, InvalidParameterError
from .infomap import GridSpec, shape_projection_map
from .shapegen import PolarOutline, rotate_outline

DEFAULT_GAMMA = 0.5
DEFAULT_CUTOFF = 1e-2
MIN_MEAN_WEIGHT = 1e-15


@dataclass(frozen=True)
class MatchResult:
    out_weights: np.ndarray
    mscore: float
    nearest: str
    nearest_index: int
    nearest_weight: float
    mean_weight: float
    accepted: bool
    rotation: float = 0.0

    @property
    def rotation_deg(self) -> float:
        return math.degrees(self.rotation)


def out_weights(model: EigenModel, query) -> np.ndarray:
    """Distance in face space from the query to every stored class."""
    omega = model.project(query)
    return np.linalg.norm(model.omegas - omega[None, :], axis=1)


def match_score(weights) -> float:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise InvalidParameterError("need at least one weight")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidParameterError("weights must be finite and non-negative")
    mean = float(w.mean())
    if mean <= MIN_MEAN_WEIGHT:
        raise DegenerateWeightsError(f"mean weight {mean:g} is too small to score")
    if w.min() == w.max():
        return 0.0
    return float(min(1.0, max(0.0, 1.0 - float(w.min()) / mean)))


def _check_thresholds(gamma, theta_cutoff):
    if not 0.0 <= gamma < 1.0:
        raise InvalidParameterError("gamma must lie in [0, 1)")
    if not theta_cutoff > 0:
        raise InvalidParameterError("theta_cutoff must be positive")


def classify(model: EigenModel, query, gamma: float = DEFAULT_GAMMA,
             theta_cutoff: float = DEFAULT_CUTOFF, rotation: float = 0.0) -> MatchResult:
    _check_thresholds(gamma, theta_cutoff)
    w = out_weights(model, query)
    score = match_score(w)
    k = int(np.argmin(w))  # first minimum wins ties
    nearest_w = float(w[k])
    return MatchResult(
        out_weights=w,
        mscore=score,
        nearest=model.classes[k].name,
        nearest_index=k,
        nearest_weight=nearest_w,
        mean_weight=float(w.mean()),
        accepted=bool(score > gamma and nearest_w <= theta_cutoff),
        rotation=float(rotation),
    )


def rotation_sweep_classify(model: EigenModel, outline: PolarOutline, spec: GridSpec, angles,
                            gamma: float = DEFAULT_GAMMA, theta_cutoff: float = DEFAULT_CUTOFF):
    """Classify the outline at each candidate rotation and keep the best score.

    Returns ``(result, best_angle)``; equal scores resolve to the earliest
    angle in sorted order.
    """
    angles = sorted(float(a) for a in angles)
    if not angles:
        raise InvalidParameterError("rotation sweep needs at least one angle")
    best = None
    for phi in angles:
        query = shape_projection_map(rotate_outline(outline, phi), spec)
        res = classify(model, query, gamma, theta_cutoff, rotation=phi)
        if best is None or res.mscore > best.mscore:
            best = res
    return best, best.rotation


def interest_value(result: MatchResult, interests) -> float:
    """Library interest of the matched class scaled by match quality.

    ``interests`` is a mapping of class name to interest, or an
    :class:`EigenModel`.
    """
    if isinstance(interests, EigenModel):
        interests = {c.name: c.interest for c in interests.classes}
    if result.nearest not in interests:
        raise KeyError(f"unknown class {result.nearest!r}")
    if not result.accepted:
        return 0.0
    return float(interests[result.nearest]) * result.mscore


@dataclass
class NoveltyLibrary:
    """Mission-time store of observed face-space vectors.

    Single writer: callers serialize :meth:`add_observation`.
    """

    dim: int
    capacity: int | None = None
    omegas: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    def _check(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        if omega.shape != (self.dim,):
            raise DimensionError(f"omega must have length {self.dim}")
        return omega

    def __len__(self):
        return len(self.omegas)

    def novelty(self, omega) -> float:
        omega = self._check(omega)
        if not self.omegas:
            return math.inf
        return float(np.min(np.linalg.norm(np.array(self.omegas) - omega, axis=1)))

    def add_observation(self, omega, label: str) -> NoveltyLibrary:
        omega = self._check(omega).copy()
        self.omegas.append(omega)
        self.labels.append(label)
        if self.capacity is not None and len(self.omegas) > self.capacity:
            # oldest observations fall out first
            del self.omegas[0], self.labels[0]
        return self


def novelty_score(lib: NoveltyLibrary, omega) -> float:
    return lib.novelty(omega)


def add_observation(lib: NoveltyLibrary, omega, label: str) -> NoveltyLibrary:
    return lib.add_observation(omega, label)


# ---------------------------------------------------------------------------
# Match report
# ---------------------------------------------------------------------------

REPORT_COLUMNS = ("query", "rotation_deg", "mscore", "nearest", "nearest_weight",
                  "mean_weight", "accepted", "interest")


def report_row(query_name: str, result: MatchResult, interest: float) -> list[str]:
    return [
        query_name,
        repr(result.rotation_deg),
        repr(result.mscore),
        result.nearest,
        repr(result.nearest_weight),
        repr(result.mean_weight),
        "yes" if result.accepted else "no",
        repr(float(interest)),
    ]


def append_report(path, query_name: str, result: MatchResult, interest: float) -> None:
    """Append one row, writing the header first if the file is new or empty."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if fresh:
            w.writerow(REPORT_COLUMNS)
        w.writerow(report_row(query_name, result, interest))


def read_report(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


__all__ = [
    "MatchResult", "NoveltyLibrary", "out_weights", "match_score", "classify",
    "rotation_sweep_classify", "interest_value", "novelty_score", "add_observation",
    "append_report", "read_report",
]
