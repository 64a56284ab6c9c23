"""Superformula outlines: generation, sampling, normalization and rotation.

Outlines live in polar form around the map center. Radii are in map units,
where the analysis map is the unit square.
"""

from __future__ import annotations

import csv
import math
import numbers
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import DegenerateOutlineError, FormatError, InvalidParameterError

TWO_PI = 2.0 * math.pi

DEFAULT_N_ANGLES = 360
DEFAULT_MAX_RADIUS = 0.45
DEFAULT_CLAMP = 1.0  # ray length, used when the superformula base sum vanishes


@dataclass(frozen=True)
class SuperformulaParams:
    a: float = 1.0
    b: float = 1.0
    m1: float = 4.0
    m2: float = 4.0
    n1: float = 2.0
    n2: float = 2.0
    n3: float = 2.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, numbers.Real) or not math.isfinite(v):
                raise InvalidParameterError(f"{f.name} must be finite, got {v!r}")
        if self.a <= 0 or self.b <= 0:
            raise InvalidParameterError("a and b must be positive")
        if self.n1 <= 0:
            raise InvalidParameterError("n1 must be positive")
        if self.m1 < 0 or self.m2 < 0:
            raise InvalidParameterError("m1 and m2 must be non-negative")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _radius_array(params: SuperformulaParams, theta, clamp: float) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        c = np.abs(np.cos(params.m1 * theta / 4.0) / params.a) ** params.n2
        s = np.abs(np.sin(params.m2 * theta / 4.0) / params.b) ** params.n3
        r = (c + s) ** (-1.0 / params.n1)
    return np.where(np.isfinite(r) & (r > 0), r, clamp)


def superformula_radius(params: SuperformulaParams, theta, clamp: float = DEFAULT_CLAMP):
    """Radius of the superformula curve at angle ``theta`` (scalar or array).

    Points where the base sum is zero (or the power overflows) are clamped
    to ``clamp``.
    """
    r = _radius_array(params, theta, clamp)
    return float(r) if r.ndim == 0 else r


@dataclass(frozen=True, eq=False)
class PolarOutline:
    """Closed contour sampled at uniformly spaced angles over [0, 2pi)."""

    angles: np.ndarray
    radii: np.ndarray
    label: str | None = None

    def __post_init__(self):
        angles = np.array(self.angles, dtype=float)
        radii = np.array(self.radii, dtype=float)
        if angles.ndim != 1 or angles.shape != radii.shape:
            raise InvalidParameterError("angles and radii must be 1-D and equal length")
        n = len(angles)
        if n < 3:
            raise InvalidParameterError("an outline needs at least 3 samples")
        if not np.all(np.isfinite(radii)) or np.any(radii <= 0):
            raise DegenerateOutlineError("radii must be finite and positive")
        expected = TWO_PI * np.arange(n) / n
        if np.max(np.abs(angles - expected)) > 1e-9:
            raise InvalidParameterError("angles must be 2*pi*i/n for i = 0..n-1")
        angles.flags.writeable = False
        radii.flags.writeable = False
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "radii", radii)

    def __len__(self):
        return len(self.radii)

    def __eq__(self, other):
        if not isinstance(other, PolarOutline):
            return NotImplemented
        return (
            np.array_equal(self.angles, other.angles)
            and np.array_equal(self.radii, other.radii)
            and self.label == other.label
        )

    @property
    def step(self) -> float:
        return TWO_PI / len(self)

    def with_radii(self, radii) -> PolarOutline:
        return PolarOutline(self.angles, radii, self.label)


def uniform_angles(n_angles: int) -> np.ndarray:
    return TWO_PI * np.arange(n_angles) / n_angles


def sample_outline(
    params: SuperformulaParams,
    n_angles: int = DEFAULT_N_ANGLES,
    rotation: float = 0.0,
    label: str | None = None,
    clamp: float = DEFAULT_CLAMP,
) -> PolarOutline:
    """Sample ``params`` at ``n_angles`` uniform angles, rotated CCW by ``rotation``."""
    if n_angles < 3:
        raise InvalidParameterError("n_angles must be >= 3")
    theta = uniform_angles(n_angles)
    # reduce the argument so a full turn gives bit-identical samples
    arg = np.mod(theta - rotation, TWO_PI)
    return PolarOutline(theta, _radius_array(params, arg, clamp), label)


def normalize_outline(outline: PolarOutline, target_max_radius: float = DEFAULT_MAX_RADIUS) -> PolarOutline:
    if target_max_radius <= 0:
        raise InvalidParameterError("target_max_radius must be positive")
    peak = float(np.max(outline.radii))
    if peak <= 0:
        raise DegenerateOutlineError("outline has no positive radius")
    radii = outline.radii * (target_max_radius / peak)
    # pin the peak so the maximum is exactly the target
    radii[np.argmax(outline.radii)] = target_max_radius
    return outline.with_radii(radii)


def rotate_outline(outline: PolarOutline, angle: float) -> PolarOutline:
    """Rotate the contour counter-clockwise by ``angle`` radians.

    Whole multiples of the angular step are an index roll; anything else is
    linear interpolation in theta between neighbouring samples.
    """
    n = len(outline)
    steps = angle / outline.step
    k = round(steps)
    if abs(steps - k) < 1e-9:
        return outline.with_radii(np.roll(outline.radii, k % n))
    src = np.mod(outline.angles - angle, TWO_PI)
    radii = np.interp(src, outline.angles, outline.radii, period=TWO_PI)
    return outline.with_radii(radii)


# ---------------------------------------------------------------------------
# Shape library and outline files
# ---------------------------------------------------------------------------

LIBRARY_COLUMNS = ("name", "a", "b", "m1", "m2", "n1", "n2", "n3", "interest")
OUTLINE_COLUMNS = ("theta_rad", "radius")


@dataclass(frozen=True)
class LibraryShape:
    name: str
    params: SuperformulaParams
    interest: float = 1.0


# Base shapes of the three-shape library, with their "near" variants.
ROUNDED_TRIANGLE = SuperformulaParams(a=1, b=1, m1=3, m2=3, n1=1500, n2=1500, n3=1500)
THREE_FACED_BLUNT = SuperformulaParams(a=1, b=1, m1=6, m2=6, n1=60, n2=55, n3=10)
SIX_POINTED_STAR = SuperformulaParams(a=1, b=1, m1=6, m2=6, n1=0.2, n2=1.7, n3=1.7)

NEAR_OVERRIDES = {
    "rounded_triangle": {"n1": 1650, "n2": 1650, "n3": 1650},
    "three_faced_blunt": {"n1": 66, "n2": 60.5, "n3": 11},
    "six_pointed_star": {"n1": 0.205, "n2": 1.71, "n3": 1.71},
}

# symmetry order of each library shape (rotations mapping it onto itself)
SYMMETRY = {"rounded_triangle": 3, "three_faced_blunt": 3, "six_pointed_star": 6}


def builtin_library() -> list[LibraryShape]:
    return [
        LibraryShape("rounded_triangle", ROUNDED_TRIANGLE, 10.0),
        LibraryShape("three_faced_blunt", THREE_FACED_BLUNT, 5.0),
        LibraryShape("six_pointed_star", SIX_POINTED_STAR, 8.0),
    ]


def _parse_float(text, column, path, line):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise FormatError(f"column {column!r}: not a number: {text!r}", path, line) from None
    if not math.isfinite(value):
        raise FormatError(f"column {column!r}: not finite: {text!r}", path, line)
    return value


def read_library(path) -> list[LibraryShape]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FormatError("empty library file", path, 1) from None
        unknown = [h for h in header if h not in LIBRARY_COLUMNS]
        if unknown:
            raise FormatError(f"unknown column {unknown[0]!r}", path, 1)
        missing = [c for c in LIBRARY_COLUMNS if c not in header]
        if missing:
            raise FormatError(f"missing column {missing[0]!r}", path, 1)
        shapes = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise FormatError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
            rec = dict(zip(header, (c.strip() for c in row)))
            values = {c: _parse_float(rec[c], c, path, lineno) for c in LIBRARY_COLUMNS[1:]}
            interest = values.pop("interest")
            if interest < 0:
                raise FormatError("column 'interest': must be non-negative", path, lineno)
            try:
                params = SuperformulaParams(**values)
            except InvalidParameterError as exc:
                raise FormatError(str(exc), path, lineno) from None
            if any(s.name == rec["name"] for s in shapes):
                raise FormatError(f"duplicate shape name {rec['name']!r}", path, lineno)
            shapes.append(LibraryShape(rec["name"], params, interest))
    if not shapes:
        raise FormatError("library has no shapes", path, 2)
    return shapes


def write_library(shapes, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LIBRARY_COLUMNS)
        for s in shapes:
            p = s.params
            w.writerow([s.name, *(repr(float(getattr(p, c))) for c in LIBRARY_COLUMNS[1:-1]), repr(float(s.interest))])


def write_outline(outline: PolarOutline, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(OUTLINE_COLUMNS)
        for t, r in zip(outline.angles, outline.radii):
            w.writerow([repr(float(t)), repr(float(r))])


def read_outline(path, label: str | None = None) -> PolarOutline:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FormatError("empty outline file", path, 1) from None
        if tuple(header) != OUTLINE_COLUMNS:
            bad = next((h for h in header if h not in OUTLINE_COLUMNS), None)
            msg = f"unknown column {bad!r}" if bad else f"header must be {','.join(OUTLINE_COLUMNS)}"
            raise FormatError(msg, path, 1)
        angles, radii = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise FormatError(f"expected 2 fields, got {len(row)}", path, lineno)
            angles.append(_parse_float(row[0], "theta_rad", path, lineno))
            radii.append(_parse_float(row[1], "radius", path, lineno))
    try:
        return PolarOutline(np.array(angles), np.array(radii), label or path.stem)
    except (InvalidParameterError, DegenerateOutlineError) as exc:
        raise FormatError(str(exc), path) from None


def library_outline(shape: LibraryShape, n_angles: int = DEFAULT_N_ANGLES, rotation: float = 0.0,
                    target_max_radius: float = DEFAULT_MAX_RADIUS) -> PolarOutline:
    """Sampled and normalized outline of a library shape."""
    raw = sample_outline(shape.params, n_angles, rotation, label=shape.name)
    return normalize_outline(raw, target_max_radius)


__all__ = [
    "SuperformulaParams", "PolarOutline", "LibraryShape", "superformula_radius", "sample_outline",
    "normalize_outline", "rotate_outline", "uniform_angles", "builtin_library", "read_library",
    "write_library", "read_outline", "write_outline", "library_outline",
]
