"""Batch experiments: ideal and near-shape tables, noise / rotation / parameter
sweeps, and map rendering.

Every run is deterministic for a given config. Outputs go to
``<out_dir>/<experiment>/<name>.csv`` (or ``.pgm``).
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigenmodel import EigenModel, train
from .infomap import GridSpec, InfoMap, shape_projection_map, write_pgm
from .matcher import DEFAULT_CUTOFF, DEFAULT_GAMMA, classify
from .perturb import NoiseSpec, apply_radial_noise, perturb_params, trial_seed
from .shapegen import (
    DEFAULT_MAX_RADIUS,
    NEAR_OVERRIDES,
    LibraryShape,
    normalize_outline,
    builtin_library,
    read_library,
    rotate_outline,
    sample_outline,
)

log = logging.getLogger(__name__)

PARAM_KINDS = ("m", "n1", "n23")


def _frange(start, stop, n):
    return tuple(float(v) for v in np.linspace(start, stop, n))


@dataclass
class ExperimentConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    library_path: Path | None = None  # None: the built-in three-shape library
    gamma: float = DEFAULT_GAMMA
    theta_cutoff: float = DEFAULT_CUTOFF
    noise_levels: tuple = _frange(0.0, 0.20, 21)  # relative std, 0.07 = 7 %
    noise_shapes: tuple | None = None  # None: every library shape
    rotation_degrees: tuple = _frange(0.0, 360.0, 361)
    m_offsets: tuple = _frange(-2.0, 2.0, 17)
    n_scales: tuple = _frange(0.9, 1.1, 21)
    trials: int = 30
    seed: int = 0
    out_dir: Path = Path("out")
    target_max_radius: float = DEFAULT_MAX_RADIUS

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for name in ("noise_levels", "rotation_degrees", "m_offsets", "n_scales"):
            values = tuple(float(v) for v in getattr(self, name))
            if not values:
                raise ValueError(f"{name} must not be empty")
            setattr(self, name, values)
        if self.library_path is not None:
            self.library_path = Path(self.library_path)
        self.out_dir = Path(self.out_dir)

    def library(self) -> list[LibraryShape]:
        if self.library_path is None:
            return builtin_library()
        return read_library(self.library_path)

    def outline(self, params, rotation=0.0, label=None):
        raw = sample_outline(params, self.grid.n_angles, rotation, label=label)
        return normalize_outline(raw, self.target_max_radius)

    def map_of(self, params, label=None) -> InfoMap:
        return shape_projection_map(self.outline(params, label=label), self.grid)


def build_model(config: ExperimentConfig, library=None) -> tuple[list[LibraryShape], EigenModel]:
    library = config.library() if library is None else library
    maps = [config.map_of(s.params, s.name) for s in library]
    model = train(maps, [s.name for s in library], [s.interest for s in library])
    return library, model


def write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _num(x) -> str:
    return repr(float(x))


def _yes(flag) -> str:
    return "yes" if flag else "no"


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

TABLE_COLUMNS = ("shape", "mscore", "min_weight", "nearest_other", "mean_weight", "nearest", "correct")


def _table_row(name, result):
    others = np.delete(result.out_weights, result.nearest_index)
    nearest_other = float(others.min()) if others.size else math.nan
    correct = result.nearest == name and result.accepted
    return {
        "shape": name,
        "mscore": result.mscore,
        "min_weight": result.nearest_weight,
        "nearest_other": nearest_other,
        "mean_weight": result.mean_weight,
        "nearest": result.nearest,
        "correct": correct,
    }


def _write_table(path, rows):
    out = [[r["shape"], _num(r["mscore"]), _num(r["min_weight"]), _num(r["nearest_other"]),
            _num(r["mean_weight"]), r["nearest"], _yes(r["correct"])] for r in rows]
    write_csv(path, TABLE_COLUMNS, out)


def run_ideal(config: ExperimentConfig, write: bool = True) -> list[dict]:
    """Classify each library shape's own map against the library."""
    library, model = build_model(config)
    rows = []
    for shape in library:
        res = classify(model, config.map_of(shape.params, shape.name), config.gamma, config.theta_cutoff)
        rows.append(_table_row(shape.name, res))
    if write:
        _write_table(config.out_dir / "ideal" / "ideal.csv", rows)
    return rows


def near_params(shape: LibraryShape):
    """Modified parameters for a library shape's "near" variant.

    Built-in shapes use their stored modifications; other shapes get all
    three exponents scaled by 1.1.
    """
    overrides = NEAR_OVERRIDES.get(shape.name)
    if overrides is None:
        p = shape.params
        overrides = {"n1": p.n1 * 1.1, "n2": p.n2 * 1.1, "n3": p.n3 * 1.1}
    return perturb_params(shape.params, overrides)


def run_near(config: ExperimentConfig, write: bool = True) -> list[dict]:
    library, model = build_model(config)
    rows = []
    for shape in library:
        query = config.map_of(near_params(shape), f"near_{shape.name}")
        res = classify(model, query, config.gamma, config.theta_cutoff)
        rows.append(_table_row(shape.name, res))
    if write:
        _write_table(config.out_dir / "near" / "near.csv", rows)
    return rows


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

NOISE_COLUMNS = ("noise_pct", "trial", "mscore", "correct")
NOISE_SUMMARY_COLUMNS = ("noise_pct", "mean_mscore", "std_mscore", "correct_rate")


def _pct(level: float) -> str:
    return repr(round(100.0 * level, 10))


def sweep_noise(config: ExperimentConfig, write: bool = True) -> dict:
    """Noisy copies of library shapes, ``trials`` per noise level.

    Returns ``{shape: {"trials": [(level, trial, mscore, correct), ...],
    "summary": [(level, mean, std, rate), ...]}}``. Trial ``t`` uses seed
    ``config.seed + t`` at every level.
    """
    library, model = build_model(config)
    wanted = config.noise_shapes or tuple(s.name for s in library)
    by_name = {s.name: s for s in library}
    results = {}
    for name in wanted:
        if name not in by_name:
            raise KeyError(f"noise shape {name!r} is not in the library")
        shape = by_name[name]
        base = config.outline(shape.params, label=name)
        trials, summary = [], []
        for level in config.noise_levels:
            scores, hits = [], []
            for t in range(config.trials):
                noisy = apply_radial_noise(base, NoiseSpec(level, trial_seed(config.seed, t)))
                res = classify(model, shape_projection_map(noisy, config.grid), config.gamma, config.theta_cutoff)
                ok = res.nearest == name and res.accepted
                trials.append((level, t, res.mscore, ok))
                scores.append(res.mscore)
                hits.append(ok)
            summary.append((level, float(np.mean(scores)), float(np.std(scores)), float(np.mean(hits))))
            log.debug("noise %s %.3f mean=%.4f rate=%.3f", name, level, summary[-1][1], summary[-1][3])
        results[name] = {"trials": trials, "summary": summary}
        if write:
            d = config.out_dir / "noise"
            write_csv(d / f"{name}.csv", NOISE_COLUMNS,
                      [[_pct(lv), t, _num(ms), _yes(ok)] for lv, t, ms, ok in trials])
            write_csv(d / f"{name}_summary.csv", NOISE_SUMMARY_COLUMNS,
                      [[_pct(lv), _num(m), _num(s), _num(r)] for lv, m, s, r in summary])
    return results


ROTATION_COLUMNS = ("shape", "angle_deg", "mscore")


def sweep_rotation(config: ExperimentConfig, write: bool = True) -> dict:
    """MScore of each library shape rotated through ``rotation_degrees``.

    Returns ``{shape: [(angle_deg, mscore), ...]}``.
    """
    library, model = build_model(config)
    results = {}
    for shape in library:
        base = config.outline(shape.params, label=shape.name)
        series = []
        for deg in config.rotation_degrees:
            query = shape_projection_map(rotate_outline(base, math.radians(deg)), config.grid)
            res = classify(model, query, config.gamma, config.theta_cutoff)
            series.append((deg, res.mscore))
        results[shape.name] = series
    if write:
        rows = [[name, _num(deg), _num(ms)] for name, series in results.items() for deg, ms in series]
        write_csv(config.out_dir / "rotation" / "rotation.csv", ROTATION_COLUMNS, rows)
    return results


PARAM_COLUMNS = ("shape", "param", "value", "mscore", "nearest", "correct")


def param_grid(shape: LibraryShape, which: str, config: ExperimentConfig):
    """Yield ``(value, params)`` pairs for one parameter sweep.

    ``m`` moves m1 = m2 together by ``m_offsets``; ``n1`` scales n1;
    ``n23`` scales n2 and n3 by the same factor, keeping their ratio.
    """
    p = shape.params
    if which == "m":
        for off in config.m_offsets:
            v = p.m1 + off
            if v < 0:
                continue
            yield v, dataclasses.replace(p, m1=v, m2=p.m2 + off)
    elif which == "n1":
        for k in config.n_scales:
            yield p.n1 * k, dataclasses.replace(p, n1=p.n1 * k)
    elif which == "n23":
        for k in config.n_scales:
            yield p.n2 * k, dataclasses.replace(p, n2=p.n2 * k, n3=p.n3 * k)
    else:
        raise ValueError(f"unknown parameter sweep {which!r}; expected one of {PARAM_KINDS}")


def sweep_param(config: ExperimentConfig, which: str, write: bool = True) -> dict:
    """MScore of modified library shapes vs. parameter value.

    Returns ``{shape: [(value, mscore, nearest), ...]}``.
    """
    if which not in PARAM_KINDS:
        raise ValueError(f"unknown parameter sweep {which!r}; expected one of {PARAM_KINDS}")
    library, model = build_model(config)
    results = {}
    for shape in library:
        series = []
        for value, params in param_grid(shape, which, config):
            res = classify(model, config.map_of(params), config.gamma, config.theta_cutoff)
            series.append((value, res.mscore, res.nearest))
        results[shape.name] = series
    if write:
        rows = [[name, which, _num(v), _num(ms), nearest, _yes(nearest == name)]
                for name, series in results.items() for v, ms, nearest in series]
        write_csv(config.out_dir / "param" / f"{which}.csv", PARAM_COLUMNS, rows)
    return results


def render_maps(config: ExperimentConfig) -> list[Path]:
    """Write the projection map of every library shape as a PGM."""
    paths = []
    d = config.out_dir / "maps"
    d.mkdir(parents=True, exist_ok=True)
    for shape in config.library():
        path = d / f"{shape.name}.pgm"
        write_pgm(config.map_of(shape.params, shape.name), path)
        paths.append(path)
    return paths
