"""Information maps under a Gaussian range-sensor model.

Every outline angle gets a ray of length ``ray_length`` from the map center,
split into ``width`` equal sections. Each section's obstruction probability
comes from a normal distribution on range. The baseline distribution sits on
a circle of radius sqrt(2)/2; its per-section Shannon information is scaled
by the section probability under a normal centered on the outline's radius,
then rasterized onto the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import DimensionError, FormatError, InvalidParameterError
from .shapegen import PolarOutline

BASELINE_RADIUS = math.sqrt(2.0) / 2.0
INFO_MAX = math.log2(math.e) / math.e  # max of p*log2(1/p), at p = 1/e


@dataclass(frozen=True)
class GridSpec:
    width: int = 64
    height: int = 64
    n_angles: int = 360
    sensor_sigma: float = 0.1
    ray_length: float = 1.0

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.n_angles < 1:
            raise InvalidParameterError("grid dimensions and ray count must be >= 1")
        if not (self.sensor_sigma > 0 and math.isfinite(self.sensor_sigma)):
            raise InvalidParameterError("sensor_sigma must be positive")
        if not (self.ray_length > 0 and math.isfinite(self.ray_length)):
            raise InvalidParameterError("ray_length must be positive")

    @property
    def baseline_radius(self) -> float:
        return BASELINE_RADIUS

    @property
    def n_sections(self) -> int:
        return self.width

    def section_edges(self) -> np.ndarray:
        """S + 1 section boundaries along a ray."""
        return self.ray_length * np.arange(self.n_sections + 1) / self.n_sections

    def section_midpoints(self) -> np.ndarray:
        return self.ray_length * (np.arange(self.n_sections) + 0.5) / self.n_sections


@dataclass(frozen=True, eq=False)
class InfoMap:
    """Grid of information values in bits, shape ``(height, width)``."""

    values: np.ndarray
    spec: GridSpec

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.spec.height, self.spec.width):
            raise DimensionError(
                f"map shape {values.shape} does not match grid {self.spec.height}x{self.spec.width}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape


def _check_sigma(sigma):
    if not sigma > 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma!r}")


def normal_cdf(x, mu=0.0, sigma=1.0):
    """Normal CDF, accurate to ~1e-16 absolute (scipy's ``ndtr``)."""
    _check_sigma(sigma)
    out = ndtr((np.asarray(x, dtype=float) - mu) / sigma)
    return float(out) if np.ndim(out) == 0 else out


def _interval_mass(lo, hi, mu, sigma):
    """P(lo < X <= hi) for X ~ N(mu, sigma), broadcasting.

    Intervals above the mean are differenced in the upper tail so small
    masses keep their relative precision.
    """
    zlo = (np.asarray(lo, dtype=float) - mu) / sigma
    zhi = (np.asarray(hi, dtype=float) - mu) / sigma
    upper = zlo > 0
    lower_diff = ndtr(zhi) - ndtr(zlo)
    upper_diff = ndtr(-zlo) - ndtr(-zhi)
    return np.clip(np.where(upper, upper_diff, lower_diff), 0.0, 1.0)


def _log2_interval_mass(lo, hi, mu, sigma):
    """log2 of ``_interval_mass`` that stays finite far into the tails."""
    zlo = (np.asarray(lo, dtype=float) - mu) / sigma
    zhi = (np.asarray(hi, dtype=float) - mu) / sigma
    # mirror intervals above the mean into the lower tail
    flip = zlo > 0
    a = np.where(flip, -zhi, zlo)
    b = np.where(flip, -zlo, zhi)
    la, lb = log_ndtr(a), log_ndtr(b)
    with np.errstate(divide="ignore"):
        out = lb + np.log1p(-np.exp(la - lb))
    return out / math.log(2.0)


def ray_section_probabilities(mu_radius: float, spec: GridSpec) -> np.ndarray:
    """Obstruction probability for each of the S sections of one ray."""
    edges = spec.section_edges()
    return _interval_mass(edges[:-1], edges[1:], mu_radius, spec.sensor_sigma)


def shannon_information(p):
    """p * log2(1/p), with 0 at p = 0 and p = 1."""
    arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise InvalidParameterError("probabilities must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(arr > 0, -arr * np.log2(np.where(arr > 0, arr, 1.0)), 0.0)
    h = np.maximum(h, 0.0)
    return float(h) if h.ndim == 0 else h


def baseline_information(spec: GridSpec) -> np.ndarray:
    """A x S information values against the centered baseline circle."""
    h = shannon_information(ray_section_probabilities(BASELINE_RADIUS, spec))
    return np.broadcast_to(h, (spec.n_angles, spec.n_sections)).copy()


def _check_outline(outline: PolarOutline, spec: GridSpec):
    if len(outline) != spec.n_angles:
        raise DimensionError(f"outline has {len(outline)} angles, grid expects {spec.n_angles}")


def ray_values(outline: PolarOutline, spec: GridSpec) -> np.ndarray:
    """Per-ray, per-section values before rasterization (A x S)."""
    _check_outline(outline, spec)
    base = shannon_information(ray_section_probabilities(BASELINE_RADIUS, spec))
    edges = spec.section_edges()
    q = _interval_mass(edges[None, :-1], edges[None, 1:], outline.radii[:, None], spec.sensor_sigma)
    return base[None, :] * q


def _raster_indices(angles: np.ndarray, spec: GridSpec):
    mids = spec.section_midpoints()
    x = 0.5 + mids[None, :] * np.cos(angles)[:, None]
    y = 0.5 + mids[None, :] * np.sin(angles)[:, None]
    col = np.floor(x * spec.width).astype(np.int64)
    row = np.floor(y * spec.height).astype(np.int64)
    inside = (col >= 0) & (col < spec.width) & (row >= 0) & (row < spec.height)
    return row, col, inside


def rasterize(values: np.ndarray, angles: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Drop A x S ray values onto the grid; colliding samples keep the max."""
    row, col, inside = _raster_indices(angles, spec)
    grid = np.zeros((spec.height, spec.width))
    np.maximum.at(grid, (row[inside], col[inside]), values[inside])
    return grid


def shape_projection_map(outline: PolarOutline, spec: GridSpec) -> InfoMap:
    """Baseline information weighted by the outline-centered section probability."""
    return InfoMap(rasterize(ray_values(outline, spec), outline.angles, spec), spec)


def _containing_section(radii: np.ndarray, spec: GridSpec) -> np.ndarray:
    s = np.floor(radii * spec.n_sections / spec.ray_length).astype(np.int64)
    return np.clip(s, 0, spec.n_sections - 1)


def shape_divergence(actual: PolarOutline, assumed: PolarOutline, spec: GridSpec,
                     measure: str = "surprisal") -> float:
    """Information gained on learning ``actual`` when ``assumed`` was expected.

    For each angle, ``p`` is the mass of the section holding the actual radius
    under a normal centered on the assumed radius. ``measure="surprisal"``
    sums log2(1/p), which is zero for a perfect match and grows with the
    mismatch. ``measure="entropy"`` sums p*log2(1/p) instead; that term peaks
    at p = 1/e and so does not order shapes by similarity at coarse sigma.
    """
    if len(actual) != len(assumed):
        raise DimensionError("outlines must share the same angle count")
    edges = spec.section_edges()
    s = _containing_section(actual.radii, spec)
    lo, hi = edges[s], edges[s + 1]
    if measure == "surprisal":
        return float(np.sum(-_log2_interval_mass(lo, hi, assumed.radii, spec.sensor_sigma)))
    if measure == "entropy":
        p = _interval_mass(lo, hi, assumed.radii, spec.sensor_sigma)
        return float(np.sum(shannon_information(p)))
    raise InvalidParameterError(f"unknown divergence measure {measure!r}")


# ---------------------------------------------------------------------------
# PGM export
# ---------------------------------------------------------------------------

PGM_MAXVAL = 65535


def to_pgm(info: InfoMap) -> str:
    """ASCII P2 image, scaled so the map maximum is 65535."""
    values = info.values
    peak = float(values.max())
    scale = PGM_MAXVAL / peak if peak > 0 else 0.0
    pixels = np.rint(values * scale).astype(np.int64)
    h, w = values.shape
    lines = ["P2", f"# scale={peak!r}", f"{w} {h}", str(PGM_MAXVAL)]
    # row 0 is the bottom of the map (y up); images are written top row first
    for row in pixels[::-1]:
        lines.append(" ".join(map(str, row)))
    return "\n".join(lines) + "\n"


def write_pgm(info: InfoMap, path) -> None:
    Path(path).write_text(to_pgm(info))


def read_pgm(path, spec: GridSpec | None = None) -> InfoMap:
    """Recover a float map from a PGM written by :func:`write_pgm`."""
    path = Path(path)
    tokens = []
    scale = None
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            if line.startswith("# scale="):
                scale = float(line.split("=", 1)[1])
            continue
        tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise FormatError("not an ASCII P2 image", path, 1)
    if scale is None:
        raise FormatError("missing '# scale=' comment", path)
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    pixels = np.array(tokens[4:], dtype=float)
    if pixels.size != w * h:
        raise FormatError(f"expected {w * h} pixels, got {pixels.size}", path)
    values = pixels.reshape(h, w)[::-1] * (scale / maxval)
    if spec is None:
        spec = GridSpec(width=w, height=h)
    return InfoMap(values, spec)
