"""Seeded perturbations: multiplicative radial noise and parameter overrides.

Noise draws come from ``numpy.random.default_rng(seed)`` (PCG64), one
standard-normal draw per outline sample in angle order.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .shapegen import PolarOutline, SuperformulaParams

MIN_RADIUS = 1e-6


@dataclass(frozen=True)
class NoiseSpec:
    percent: float = 0.0  # relative std of the radius, 0.05 means 5 %
    seed: int = 0

    def __post_init__(self):
        if not self.percent >= 0:
            raise InvalidParameterError("noise percent must be non-negative")


def apply_radial_noise(outline: PolarOutline, spec: NoiseSpec) -> PolarOutline:
    if spec.percent == 0:
        return outline
    rng = np.random.default_rng(spec.seed)
    eps = rng.normal(0.0, spec.percent, size=len(outline))
    radii = np.maximum(outline.radii * (1.0 + eps), MIN_RADIUS)
    return outline.with_radii(radii)


def perturb_params(params: SuperformulaParams, overrides=None, **kwargs) -> SuperformulaParams:
    """Field-wise replacement; the result is re-validated."""
    changes = dict(overrides or {})
    changes.update(kwargs)
    valid = {f.name for f in dataclasses.fields(params)}
    unknown = sorted(set(changes) - valid)
    if unknown:
        raise InvalidParameterError(f"unknown parameter {unknown[0]!r}")
    return dataclasses.replace(params, **changes)


def trial_seed(base_seed: int, trial: int) -> int:
    return base_seed + trial
