"""Superformula shape libraries, information maps and eigenface matching."""

from .eigenmodel import EigenModel, load_model, save_model, train
from .errors import SupershapeError
from .harness import ExperimentConfig
from .infomap import GridSpec, InfoMap, shape_divergence, shape_projection_map
from .matcher import MatchResult, NoveltyLibrary, classify, interest_value, match_score, rotation_sweep_classify
from .perturb import NoiseSpec, apply_radial_noise, perturb_params
from .shapegen import (
    LibraryShape,
    PolarOutline,
    SuperformulaParams,
    normalize_outline,
    builtin_library,
    rotate_outline,
    sample_outline,
    superformula_radius,
)

__version__ = "0.1.0"
