import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.linalg import eigsh

from supershape.eigenmodel import (
    EIGEN_CUTOFF,
    class_distance,
    flatten,
    load_model,
    project,
    reconstruct,
    save_model,
    train,
    unflatten,
)
from supershape.errors import (
    DegenerateTrainingError,
    DimensionError,
    FormatError,
    InsufficientTrainingError,
    InvalidParameterError,
)
from supershape.infomap import GridSpec, InfoMap, shape_projection_map


def random_maps(seed, count=4, size=8):
    rng = np.random.default_rng(seed)
    spec = GridSpec(width=size, height=size)
    return [InfoMap(rng.random((size, size)), spec) for _ in range(count)]


def brute_force_pca(maps):
    """Full (M*N)x(M*N) covariance eigendecomposition."""
    data = np.array([m.values.ravel() for m in maps])
    centered = data - data.mean(axis=0)
    cov = centered.T @ centered / len(maps)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    return evals[order], evecs[:, order], centered


def test_flatten_row_major():
    spec = GridSpec(width=2, height=2)
    np.testing.assert_array_equal(flatten(InfoMap([[1, 2], [3, 4]], spec)), [1, 2, 3, 4])


def test_unflatten_inverts_flatten():
    m = random_maps(0, 1, 5)[0]
    np.testing.assert_array_equal(unflatten(flatten(m), 5, 5), m.values)
    with pytest.raises(DimensionError):
        unflatten(np.zeros(7), 2, 3)


def test_flatten_zero_map():
    assert not flatten(np.zeros((3, 4))).any()


class TestTrain:
    def test_two_maps_one_eigenface(self):
        model = train(random_maps(1, 2), ["a", "b"])
        assert model.n_eigen == 1

    def test_builtin_library_rank(self, builtin_model):
        assert builtin_model.n_eigen == 2

    def test_builtin_library_matches_brute_force(self, library, outlines, spec):
        maps = [shape_projection_map(outlines[s.name], spec) for s in library]
        model = train(maps, [s.name for s in library])
        # Lanczos on the full 4096 x 4096 covariance
        data = np.array([m.values.ravel() for m in maps])
        centered = data - data.mean(axis=0)
        cov = centered.T @ centered / len(maps)
        evals = np.sort(eigsh(cov, k=3, which="LA")[0])[::-1]
        nonzero = evals[evals > EIGEN_CUTOFF * evals[0]]
        assert model.n_eigen == len(nonzero) <= 2
        np.testing.assert_allclose(model.eigenvalues, nonzero, rtol=1e-8)

    def test_identical_maps_are_degenerate(self):
        m = random_maps(2, 1)[0]
        with pytest.raises(DegenerateTrainingError):
            train([m, m, m], ["a", "b", "c"])

    def test_needs_two_maps(self):
        with pytest.raises(InsufficientTrainingError):
            train(random_maps(3, 1), ["a"])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            train([random_maps(4, 1, 8)[0], random_maps(4, 1, 6)[0]], ["a", "b"])

    def test_unique_names(self):
        with pytest.raises(InvalidParameterError):
            train(random_maps(5, 2), ["a", "a"])

    def test_mean_centering(self):
        maps = random_maps(6, 5)
        model = train(maps, list("abcde"))
        residual = sum(flatten(m) - model.mean for m in maps)
        assert np.abs(residual).max() <= 1e-9

    def test_sign_convention(self):
        model = train(random_maps(7, 4), list("abcd"))
        for face in model.eigenfaces:
            assert face[np.argmax(np.abs(face))] > 0

    def test_interests_stored(self):
        model = train(random_maps(8, 3), ["x", "y", "z"], [1.0, 2.5, 0.0])
        assert [c.interest for c in model.classes] == [1.0, 2.5, 0.0]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), count=st.integers(2, 6))
def test_reduced_system_matches_brute_force(seed, count):
    maps = random_maps(seed, count)
    model = train(maps, [str(i) for i in range(count)])
    evals, evecs, centered = brute_force_pca(maps)
    k = model.n_eigen
    assert k == count - 1  # random maps are in general position
    np.testing.assert_allclose(model.eigenvalues, evals[:k], rtol=1e-8, atol=1e-12)
    gram = model.eigenfaces @ model.eigenfaces.T
    assert np.abs(gram - np.eye(k)).max() <= 1e-9
    # eigenvector signs are arbitrary: compare absolute projections
    np.testing.assert_allclose(np.abs(model.omegas), np.abs(centered @ evecs[:, :k]), atol=1e-8)
    for m, c in zip(maps, model.classes):
        assert np.abs(model.reconstruct(c.omega) - m.values).max() <= 1e-8


class TestProject:
    def test_mean_projects_to_zero(self):
        maps = random_maps(9, 4)
        model = train(maps, list("abcd"))
        np.testing.assert_allclose(model.project(model.mean), 0.0, atol=1e-14)

    def test_training_maps_reproduce_stored_omegas(self):
        maps = random_maps(10, 4)
        model = train(maps, list("abcd"))
        for m, c in zip(maps, model.classes):
            np.testing.assert_allclose(project(model, m), c.omega, atol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(alpha=st.floats(-2, 2))
    def test_affine_combination(self, alpha):
        maps = random_maps(11, 4)
        model = train(maps, list("abcd"))
        a, b = flatten(maps[0]), flatten(maps[1])
        mixed = model.project(alpha * a + (1 - alpha) * b)
        expected = alpha * model.project(a) + (1 - alpha) * model.project(b)
        np.testing.assert_allclose(mixed, expected, atol=1e-9)

    def test_dimension_mismatch(self):
        model = train(random_maps(12, 3), list("abc"))
        with pytest.raises(DimensionError):
            model.project(random_maps(12, 1, 6)[0])


class TestDistance:
    def test_zero_at_class(self, builtin_model):
        for k, c in enumerate(builtin_model.classes):
            assert class_distance(c.omega, builtin_model, k) == 0.0

    def test_axis_offset(self, builtin_model):
        omega = builtin_model.classes[1].omega + np.array([-3.0, 0.0])
        assert class_distance(omega, builtin_model, 1) == pytest.approx(3.0)

    def test_symmetric(self, builtin_model):
        o = builtin_model.omegas
        assert class_distance(o[0], builtin_model, 2) == class_distance(o[2], builtin_model, 0)

    def test_bad_index(self, builtin_model):
        with pytest.raises(IndexError):
            class_distance(builtin_model.classes[0].omega, builtin_model, 3)

    def test_bad_length(self, builtin_model):
        with pytest.raises(DimensionError):
            class_distance(np.zeros(3), builtin_model, 0)


class TestReconstruct:
    def test_zero_gives_mean(self):
        model = train(random_maps(13, 3), list("abc"))
        np.testing.assert_array_equal(reconstruct(model, np.zeros(model.n_eigen)).values.ravel(), model.mean)

    def test_linear(self):
        model = train(random_maps(14, 4), list("abcd"))
        x, y = np.array([1.0, -2.0, 0.5]), np.array([0.3, 0.0, 4.0])
        lhs = model.reconstruct(x + y) - model.reconstruct(np.zeros(3))
        rhs = (model.reconstruct(x) - model.reconstruct(np.zeros(3))) + (model.reconstruct(y) - model.reconstruct(np.zeros(3)))
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_library_maps_reconstruct_exactly(self, builtin_model, library, outlines, spec):
        for s in library:
            m = shape_projection_map(outlines[s.name], spec)
            back = builtin_model.reconstruct(builtin_model.project(m))
            assert np.abs(back - m.values).max() <= 1e-8


class TestModelFile:
    def test_round_trip(self, builtin_model, tmp_path):
        path = tmp_path / "model.txt"
        save_model(builtin_model, path)
        back = load_model(path)
        lines = path.read_text().splitlines()
        assert lines[:4] == ["EIGMODEL 1", "grid 64 64", "eigen 2", "classes 3"]
        np.testing.assert_array_equal(back.mean, builtin_model.mean)
        np.testing.assert_array_equal(back.eigenfaces, builtin_model.eigenfaces)
        np.testing.assert_array_equal(back.omegas, builtin_model.omegas)
        np.testing.assert_allclose(back.eigenvalues, builtin_model.eigenvalues, rtol=1e-12)
        assert back.names == builtin_model.names
        assert [c.interest for c in back.classes] == [c.interest for c in builtin_model.classes]

    def test_projections_preserved(self, builtin_model, outlines, spec, tmp_path):
        path = tmp_path / "model.txt"
        save_model(builtin_model, path)
        back = load_model(path)
        m = shape_projection_map(outlines["six_pointed_star"], spec)
        a, b = builtin_model.project(m), back.project(m)
        assert np.abs(a - b).max() <= 1e-12 * np.abs(a).max()

    def test_truncated_file(self, builtin_model, tmp_path):
        path = tmp_path / "model.txt"
        save_model(builtin_model, path)
        path.write_text("\n".join(path.read_text().splitlines()[:-2]) + "\n")
        with pytest.raises(FormatError):
            load_model(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "model.txt"
        path.write_text("EIGMODEL 2\n")
        with pytest.raises(FormatError):
            load_model(path)

    def test_whitespace_names_rejected(self, tmp_path):
        model = train(random_maps(15, 2), ["a b", "c"])
        with pytest.raises(InvalidParameterError):
            save_model(model, tmp_path / "m.txt")
