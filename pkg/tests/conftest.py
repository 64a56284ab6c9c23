import pytest

from supershape.harness import ExperimentConfig, build_model
from supershape.infomap import GridSpec
from supershape.shapegen import library_outline, builtin_library


@pytest.fixture(scope="session")
def spec():
    return GridSpec()


@pytest.fixture(scope="session")
def library():
    return builtin_library()


@pytest.fixture(scope="session")
def outlines(library):
    return {s.name: library_outline(s) for s in library}


@pytest.fixture(scope="session")
def builtin_model():
    _, model = build_model(ExperimentConfig())
    return model


@pytest.fixture
def config(tmp_path):
    return ExperimentConfig(out_dir=tmp_path / "out")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key, (ok, detail) in sorted(results.items()):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
