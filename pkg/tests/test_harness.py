import csv
import numpy as np
import pytest

from supershape.errors import InsufficientTrainingError
from supershape.harness import (
    ExperimentConfig,
    param_grid,
    render_maps,
    run_ideal,
    run_near,
    sweep_noise,
    sweep_param,
    sweep_rotation,
)
from supershape.infomap import BASELINE_RADIUS, read_pgm
from supershape.shapegen import LibraryShape, SuperformulaParams, library_outline, builtin_library, write_library


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_config_rejects_empty_ranges(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(noise_levels=())
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)


def test_default_sweep_grids():
    cfg = ExperimentConfig()
    assert len(cfg.noise_levels) == 21 and cfg.noise_levels[7] == pytest.approx(0.07)
    assert len(cfg.rotation_degrees) == 361
    assert cfg.m_offsets[0] == -2.0 and cfg.m_offsets[-1] == 2.0 and len(cfg.m_offsets) == 17
    assert len(cfg.n_scales) == 21 and cfg.n_scales[10] == 1.0


class TestTables:
    def test_ideal(self, config):
        table = run_ideal(config)
        assert [r["shape"] for r in table] == ["rounded_triangle", "three_faced_blunt", "six_pointed_star"]
        for r in table:
            assert r["correct"] and r["nearest"] == r["shape"]
            assert r["mscore"] == pytest.approx(1.0, abs=1e-6)
            assert r["min_weight"] <= 1e-9
            assert 0 < r["nearest_other"] and r["mean_weight"] > 0
        written = rows(config.out_dir / "ideal" / "ideal.csv")
        assert list(written[0]) == ["shape", "mscore", "min_weight", "nearest_other", "mean_weight", "nearest", "correct"]

    def test_two_shape_library(self, tmp_path):
        path = tmp_path / "lib.csv"
        write_library(builtin_library()[1:], path)
        table = run_ideal(ExperimentConfig(library_path=path, out_dir=tmp_path))
        assert len(table) == 2
        assert all(r["correct"] and r["mscore"] == pytest.approx(1.0, abs=1e-6) for r in table)

    def test_single_shape_library(self, tmp_path):
        path = tmp_path / "lib.csv"
        write_library(builtin_library()[:1], path)
        with pytest.raises(InsufficientTrainingError):
            run_ideal(ExperimentConfig(library_path=path, out_dir=tmp_path))

    def test_near(self, config):
        table = {r["shape"]: r for r in run_near(config)}
        assert all(r["correct"] for r in table.values())
        assert table["rounded_triangle"]["mscore"] >= 0.99
        assert 0.85 <= table["six_pointed_star"]["mscore"] <= 0.99
        assert (config.out_dir / "near" / "near.csv").exists()

    def test_near_for_custom_shape(self, tmp_path):
        lib = builtin_library() + [LibraryShape("blob", SuperformulaParams(m1=5, m2=5, n1=4, n2=4, n3=4), 1.0)]
        path = tmp_path / "lib.csv"
        write_library(lib, path)
        table = run_near(ExperimentConfig(library_path=path, out_dir=tmp_path))
        assert len(table) == 4


class TestNoise:
    def test_zero_noise_scores_one(self, tmp_path):
        cfg = ExperimentConfig(noise_levels=(0.0, 0.1), trials=3, out_dir=tmp_path,
                               noise_shapes=("rounded_triangle",))
        res = sweep_noise(cfg)
        assert list(res) == ["rounded_triangle"]
        zero = [t for t in res["rounded_triangle"]["trials"] if t[0] == 0.0]
        assert len(zero) == 3 and all(ms == pytest.approx(1.0, abs=1e-9) and ok for _, _, ms, ok in zero)
        table = rows(tmp_path / "noise" / "rounded_triangle.csv")
        assert list(table[0]) == ["noise_pct", "trial", "mscore", "correct"]
        assert [r["noise_pct"] for r in table] == ["0.0"] * 3 + ["10.0"] * 3
        summary = rows(tmp_path / "noise" / "rounded_triangle_summary.csv")
        assert len(summary) == 2

    def test_byte_identical_rerun(self, tmp_path):
        kw = dict(noise_levels=(0.0, 0.05, 0.12), trials=4, seed=42)
        sweep_noise(ExperimentConfig(out_dir=tmp_path / "a", **kw))
        sweep_noise(ExperimentConfig(out_dir=tmp_path / "b", **kw))
        for name in ("rounded_triangle", "three_faced_blunt", "six_pointed_star"):
            a = (tmp_path / "a" / "noise" / f"{name}.csv").read_bytes()
            assert a == (tmp_path / "b" / "noise" / f"{name}.csv").read_bytes()

    def test_seed_changes_output(self, tmp_path):
        kw = dict(noise_levels=(0.1,), trials=2, noise_shapes=("six_pointed_star",))
        a = sweep_noise(ExperimentConfig(out_dir=tmp_path, seed=1, **kw), write=False)
        b = sweep_noise(ExperimentConfig(out_dir=tmp_path, seed=2, **kw), write=False)
        assert a["six_pointed_star"]["trials"] != b["six_pointed_star"]["trials"]

    def test_unknown_shape(self, tmp_path):
        with pytest.raises(KeyError):
            sweep_noise(ExperimentConfig(out_dir=tmp_path, noise_shapes=("nope",)))


class TestRotation:
    def test_symmetry_angles(self, tmp_path):
        cfg = ExperimentConfig(rotation_degrees=(0, 45, 60, 120, 240, 300), out_dir=tmp_path)
        res = sweep_rotation(cfg)
        for name, series in res.items():
            scores = dict(series)
            assert scores[0] == pytest.approx(1.0, abs=1e-6)
        tri = dict(res["rounded_triangle"])
        assert tri[120] >= 0.99 and tri[240] >= 0.99 and tri[45] < 0.99
        star = dict(res["six_pointed_star"])
        assert all(star[a] >= 0.99 for a in (60, 120, 240, 300))
        table = rows(tmp_path / "rotation" / "rotation.csv")
        assert list(table[0]) == ["shape", "angle_deg", "mscore"]
        assert len(table) == 18
        assert all(0 <= float(r["mscore"]) <= 1 for r in table)


class TestParam:
    def test_grids(self):
        cfg = ExperimentConfig()
        tri = builtin_library()[0]
        m_vals = [v for v, _ in param_grid(tri, "m", cfg)]
        assert m_vals[0] == 1.0 and m_vals[-1] == 5.0 and len(m_vals) == 17
        blunt = builtin_library()[1]
        for v, p in param_grid(blunt, "n23", cfg):
            assert p.n2 / p.n3 == pytest.approx(5.5)
        with pytest.raises(ValueError):
            list(param_grid(tri, "a", cfg))

    @pytest.mark.parametrize("which", ["m", "n1", "n23"])
    def test_base_value_scores_one(self, tmp_path, which):
        cfg = ExperimentConfig(m_offsets=(-0.5, 0.0, 0.5), n_scales=(0.95, 1.0, 1.05), out_dir=tmp_path)
        res = sweep_param(cfg, which)
        for name, series in res.items():
            assert series[1][1] == pytest.approx(1.0, abs=1e-6)
            assert series[0][1] < 1 and series[2][1] < 1
        table = rows(tmp_path / "param" / f"{which}.csv")
        assert list(table[0]) == ["shape", "param", "value", "mscore", "nearest", "correct"]
        assert all(0 <= float(r["mscore"]) <= 1 for r in table)

    def test_unknown(self, config):
        with pytest.raises(ValueError):
            sweep_param(config, "b")


class TestRender:
    def test_writes_and_is_deterministic(self, tmp_path):
        a = render_maps(ExperimentConfig(out_dir=tmp_path / "a"))
        b = render_maps(ExperimentConfig(out_dir=tmp_path / "b"))
        assert [p.name for p in a] == ["rounded_triangle.pgm", "three_faced_blunt.pgm", "six_pointed_star.pgm"]
        for x, y in zip(a, b):
            assert x.read_bytes() == y.read_bytes()

    def _top_cells(self, values, frac=0.01):
        k = max(1, int(frac * values.size))
        thresh = np.sort(values.ravel())[::-1][k - 1]
        rr, cc = np.nonzero(values >= thresh)
        return rr, cc

    def test_circle_renders_a_ring(self, tmp_path):
        lib = [LibraryShape("circle", SuperformulaParams(), 1.0), builtin_library()[0]]
        path = tmp_path / "lib.csv"
        write_library(lib, path)
        cfg = ExperimentConfig(library_path=path, out_dir=tmp_path)
        pgm = render_maps(cfg)[0]
        values = read_pgm(pgm).values
        rr, cc = self._top_cells(values)
        radius = np.hypot((cc + 0.5) / 64 - 0.5, (rr + 0.5) / 64 - 0.5)
        assert radius.max() - radius.min() <= 2 / 64
        angles = np.degrees(np.arctan2((rr + 0.5) / 64 - 0.5, (cc + 0.5) / 64 - 0.5)) % 360
        assert np.histogram(angles, bins=4, range=(0, 360))[0].min() > 0

    def test_star_brightest_at_points(self, tmp_path):
        pgm = render_maps(ExperimentConfig(out_dir=tmp_path))[2]
        rr, cc = self._top_cells(read_pgm(pgm).values)
        angles = np.degrees(np.arctan2((rr + 0.5) / 64 - 0.5, (cc + 0.5) / 64 - 0.5)) % 60
        off_point = np.minimum(angles, 60 - angles)
        assert off_point.max() <= 10

    @pytest.mark.parametrize("index", [0, 1, 2])
    def test_brightest_cells_sit_between_outline_and_baseline(self, tmp_path, index):
        # the bright band lies outside the outline, inside the baseline circle,
        # and peaks halfway between the two
        shape = builtin_library()[index]
        pgm = render_maps(ExperimentConfig(out_dir=tmp_path))[index]
        values = read_pgm(pgm).values
        o = library_outline(shape)
        step = 2 * np.pi / len(o)

        def polar(r, c):
            x, y = (c + 0.5) / 64 - 0.5, (r + 0.5) / 64 - 0.5
            ray = np.round((np.arctan2(y, x) % (2 * np.pi)) / step).astype(int) % len(o)
            return np.hypot(x, y), o.radii[ray]

        rho, outline_r = polar(*self._top_cells(values))
        assert np.all(rho > outline_r) and np.all(rho < BASELINE_RADIUS)
        rho, outline_r = polar(*np.unravel_index(values.argmax(), values.shape))
        assert abs(rho - (outline_r + BASELINE_RADIUS) / 2) <= 2 / 64
