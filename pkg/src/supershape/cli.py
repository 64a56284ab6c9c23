"""Command-line front end.

Settings come from built-in defaults, then an optional ``key = value`` config
file (``--config``), then flags. The seed falls back to ``$SUPERSHAPE_SEED``
when neither the file nor a flag sets it.

Exit codes: 0 success / accepted match, 1 usage or configuration error,
2 I/O or format error, 3 rejected match.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import harness
from .eigenmodel import load_model, save_model
from .errors import FormatError, SupershapeError
from .infomap import GridSpec, shape_projection_map, write_pgm
from .matcher import append_report, classify, interest_value, rotation_sweep_classify
from .shapegen import normalize_outline, read_library, read_outline, write_outline

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_REJECTED = 3

SEED_ENV = "SUPERSHAPE_SEED"
SWEEP_KINDS = ("noise", "rotation", "param", "ideal", "near")

log = logging.getLogger("supershape")


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    grid: int = 64
    angles: int = 360
    sigma: float = 0.1
    gamma: float = 0.5
    cutoff: float = 1e-2
    seed: int | None = None
    trials: int = 30
    library: Path | None = None
    model: Path | None = None
    out: Path = Path("out")
    report: Path = Path("match_report.csv")
    noise_levels: tuple | None = None
    noise_shapes: tuple | None = None
    rotation_degrees: tuple | None = None
    m_offsets: tuple | None = None
    n_scales: tuple | None = None
    explicit: frozenset = frozenset()  # keys set by the config file or flags

    def validate(self):
        if self.grid < 1:
            raise UsageError("--grid must be >= 1")
        if self.angles < 3:
            raise UsageError("--angles must be >= 3")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise UsageError("--sigma must be positive")
        if not 0 <= self.gamma < 1:
            raise UsageError("--gamma must lie in [0, 1)")
        if not self.cutoff > 0:
            raise UsageError("--cutoff must be positive")
        if self.trials < 1:
            raise UsageError("--trials must be >= 1")
        for name in ("noise_levels", "rotation_degrees", "m_offsets", "n_scales", "noise_shapes"):
            value = getattr(self, name)
            if value is not None and len(value) == 0:
                raise UsageError(f"--{name.replace('_', '-')} must not be empty")

    @property
    def grid_spec(self) -> GridSpec:
        return GridSpec(width=self.grid, height=self.grid, n_angles=self.angles, sensor_sigma=self.sigma)


def _float_list(text):
    items = [t for t in (s.strip() for s in str(text).split(",")) if t]
    try:
        return tuple(float(t) for t in items)
    except ValueError:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from None


def _name_list(text):
    return tuple(t for t in (s.strip() for s in str(text).split(",")) if t)


_CONVERTERS = {
    "grid": int, "angles": int, "sigma": float, "gamma": float, "cutoff": float,
    "seed": int, "trials": int, "library": Path, "model": Path, "out": Path, "report": Path,
    "noise_levels": _float_list, "rotation_degrees": _float_list, "m_offsets": _float_list,
    "n_scales": _float_list, "noise_shapes": _name_list,
}


def _convert(key, value):
    try:
        return _CONVERTERS[key](value)
    except UsageError:
        raise
    except (TypeError, ValueError):
        raise UsageError(f"bad value for {key}: {value!r}") from None


def read_config_file(path) -> dict:
    path = Path(path)
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError("expected 'key = value'", path, lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise FormatError(f"unknown key {key!r}", path, lineno)
        try:
            values[key] = _convert(key, value)
        except UsageError as exc:
            raise FormatError(str(exc), path, lineno) from None
    return values


def resolve_config(args) -> CliConfig:
    cfg = CliConfig()
    updates = {}
    if getattr(args, "config", None):
        updates.update(read_config_file(args.config))
    for key in _CONVERTERS:
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = _convert(key, value) if isinstance(value, str) else value
    cfg = dataclasses.replace(cfg, **updates, explicit=frozenset(updates))
    if cfg.seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            cfg.seed = int(env) if env else 0
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    cfg.validate()
    return cfg


def experiment_config(cfg: CliConfig) -> harness.ExperimentConfig:
    kwargs = dict(
        grid=cfg.grid_spec, library_path=cfg.library, gamma=cfg.gamma, theta_cutoff=cfg.cutoff,
        trials=cfg.trials, seed=cfg.seed, out_dir=cfg.out,
    )
    for name in ("noise_levels", "noise_shapes", "rotation_degrees", "m_offsets", "n_scales"):
        value = getattr(cfg, name)
        if value is not None:
            kwargs[name] = value
    return harness.ExperimentConfig(**kwargs)


def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_gen(cfg: CliConfig) -> int:
    """Write each library shape's outline CSV and projection-map PGM."""
    library = read_library(_need(cfg.library, "--library"))
    exp = experiment_config(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    for shape in library:
        outline = exp.outline(shape.params, label=shape.name)
        write_outline(outline, cfg.out / f"{shape.name}.csv")
        write_pgm(shape_projection_map(outline, exp.grid), cfg.out / f"{shape.name}.pgm")
        print(f"{shape.name}: {cfg.out / shape.name}.csv, .pgm")
    return EXIT_OK


def cmd_train(cfg: CliConfig) -> int:
    exp = experiment_config(cfg)
    exp.library_path = Path(_need(cfg.library, "--library"))
    model_path = _need(cfg.model, "--model")
    _, model = harness.build_model(exp)
    save_model(model, model_path)
    print(f"trained {len(model.classes)} classes, {model.n_eigen} eigenfaces -> {model_path}")
    return EXIT_OK


def cmd_match(cfg: CliConfig, outline_path, rotate_sweep=False, normalize=True, name=None) -> int:
    model = load_model(_need(cfg.model, "--model"))
    if "grid" in cfg.explicit and (cfg.grid != model.width or cfg.grid != model.height):
        raise UsageError(f"--grid {cfg.grid} does not match the model grid {model.width}x{model.height}")
    outline = read_outline(outline_path)
    if "angles" in cfg.explicit and cfg.angles != len(outline):
        raise UsageError(f"--angles {cfg.angles} does not match the outline's {len(outline)} samples")
    if normalize:
        outline = normalize_outline(outline)
    spec = GridSpec(model.width, model.height, len(outline), cfg.sigma)
    if rotate_sweep:
        step = 2 * math.pi / len(outline)
        result, _ = rotation_sweep_classify(model, outline, spec, [i * step for i in range(len(outline))],
                                            cfg.gamma, cfg.cutoff)
    else:
        result = classify(model, shape_projection_map(outline, spec), cfg.gamma, cfg.cutoff)
    interest = interest_value(result, model)
    query = name or Path(outline_path).stem
    append_report(cfg.report, query, result, interest)
    verdict = "accepted" if result.accepted else "rejected"
    print(f"{query}: nearest={result.nearest} mscore={result.mscore:.6f} "
          f"rotation={result.rotation_deg:g}deg interest={interest:g} {verdict}")
    return EXIT_OK if result.accepted else EXIT_REJECTED


def cmd_sweep(cfg: CliConfig, kind: str, which=None) -> int:
    if kind not in SWEEP_KINDS:
        raise UsageError(f"unknown sweep kind {kind!r}; choose from {', '.join(SWEEP_KINDS)}")
    exp = experiment_config(cfg)
    if kind == "noise":
        res = harness.sweep_noise(exp)
        for name, data in res.items():
            print(f"noise/{name}: {len(data['summary'])} levels x {exp.trials} trials")
    elif kind == "rotation":
        res = harness.sweep_rotation(exp)
        print(f"rotation: {len(res)} shapes x {len(exp.rotation_degrees)} angles")
    elif kind == "param":
        for w in ([which] if which else harness.PARAM_KINDS):
            harness.sweep_param(exp, w)
            print(f"param/{w}: written")
    elif kind == "ideal":
        for row in harness.run_ideal(exp):
            print(f"{row['shape']}: mscore={row['mscore']:.4f} correct={row['correct']}")
    else:
        for row in harness.run_near(exp):
            print(f"{row['shape']}: mscore={row['mscore']:.4f} correct={row['correct']}")
    return EXIT_OK


def cmd_render(cfg: CliConfig) -> int:
    for path in harness.render_maps(experiment_config(cfg)):
        print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--config", help="key = value file; flags override it")
    g.add_argument("--grid", type=int, help="map width and height in cells (default 64)")
    g.add_argument("--angles", type=int, help="rays / outline samples per shape (default 360)")
    g.add_argument("--sigma", type=float, help="sensor standard deviation in map units (default 0.1)")
    g.add_argument("--gamma", type=float, help="minimum MScore for an accepted match (default 0.5)")
    g.add_argument("--cutoff", type=float, help="maximum nearest out-weight for a match (default 1e-2)")
    g.add_argument("--seed", type=int, help=f"base seed (default ${SEED_ENV} or 0)")
    g.add_argument("--trials", type=int, help="noise trials per level (default 30)")
    g.add_argument("--library", help="shape library CSV (name,a,b,m1,m2,n1,n2,n3,interest)")
    g.add_argument("--model", help="eigen model file")
    g.add_argument("--out", help="output directory (default out)")
    g.add_argument("--report", help="match report CSV to append to (default match_report.csv)")
    g.add_argument("--noise-levels", dest="noise_levels", help="comma list of relative noise std devs")
    g.add_argument("--noise-shapes", dest="noise_shapes", help="comma list of library shapes to perturb")
    g.add_argument("--rotation-degrees", dest="rotation_degrees", help="comma list of rotation angles")
    g.add_argument("--m-offsets", dest="m_offsets", help="comma list of offsets added to m1 = m2")
    g.add_argument("--n-scales", dest="n_scales", help="comma list of factors for n1 and n2, n3")
    g.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = _Parser(prog="supershape", description="Superformula shape libraries and eigenface matching "
                     "of information maps.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("gen", parents=[common], help="write outline CSVs and map PGMs for a library")
    sub.add_parser("train", parents=[common], help="train and save an eigen model from a library")
    p = sub.add_parser("match", parents=[common], help="classify an outline CSV against a model")
    p.add_argument("outline", help="outline CSV (theta_rad,radius)")
    p.add_argument("--rotate-sweep", action="store_true", help="try every sample rotation, keep the best")
    p.add_argument("--no-normalize", action="store_true", help="use the outline's radii as given")
    p.add_argument("--name", help="query name in the report (default: file stem)")
    p = sub.add_parser("sweep", parents=[common], help="run an experiment sweep")
    p.add_argument("kind", help=f"one of: {', '.join(SWEEP_KINDS)}")
    p.add_argument("--which", choices=harness.PARAM_KINDS, help="parameter for 'param' (default: all)")
    sub.add_parser("render", parents=[common], help="write library projection maps as PGM")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "gen":
            return cmd_gen(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "match":
            return cmd_match(cfg, args.outline, args.rotate_sweep, not args.no_normalize, args.name)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.kind, args.which)
        return cmd_render(cfg)
    except UsageError as exc:
        print(f"supershape: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError) as exc:
        print(f"supershape: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SupershapeError, ValueError, KeyError) as exc:
        print(f"supershape: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
