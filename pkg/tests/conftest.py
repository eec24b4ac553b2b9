"""Shared fixtures: one built toy solver and small generated suites per session."""

from __future__ import annotations

import contextlib
import io
import shutil
from pathlib import Path
from types import SimpleNamespace

import pytest

from satevo.cli import main as cli_main
from satevo.fixture import materialize_toy_solver
from satevo.suites import generate_smoke_suite, generate_validation_suite
from satevo.workspace import build_variant, clone_variant, validate_layout


def require_compiler() -> None:
    if shutil.which("cc") is None and shutil.which("gcc") is None:
        pytest.fail("no C compiler on PATH; the solver fixture cannot be compiled")


@pytest.fixture(scope="session")
def pristine_root(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """The vendored toy solver tree, materialized once per session (not built)."""
    root = tmp_path_factory.mktemp("toysolver") / "pristine"
    materialize_toy_solver(root)
    return root


@pytest.fixture(scope="session")
def built_variant(pristine_root: Path):
    """The pristine solver, layout-checked and compiled once per session.

    Tests must treat this tree as read-only; anything that edits sources or
    swaps the budget takes a private copy through ``variant_copy``.
    """
    require_compiler()
    report = validate_layout(pristine_root, variant_id="pristine")
    assert report.ok, f"fixture layout violations: {report.violations}"
    outcome = build_variant(report.variant)
    assert outcome.success, f"fixture build failed:\n{outcome.diagnostics}"
    return report.variant


@pytest.fixture()
def variant_copy(built_variant, tmp_path: Path):
    """Callable producing a private, mutable copy of the pristine tree.

    The copy drops the compiled binary, so callers rebuild after editing.
    """

    def _copy(name: str = "variant") -> Path:
        return clone_variant(built_variant.root, tmp_path / name)

    return _copy


@pytest.fixture(scope="session")
def smoke_dir(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """A reduced smoke suite, sized so gate runs stay fast inside tests."""
    dest = tmp_path_factory.mktemp("suites") / "smoke"
    return generate_smoke_suite(dest, count=40, seed=7, max_vars=8)


@pytest.fixture(scope="session")
def validation_dir(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """A reduced validation suite with proof-checked unsatisfiable instances."""
    dest = tmp_path_factory.mktemp("suites") / "validation"
    return generate_validation_suite(dest, count=24, seed=11, max_vars=16)


@pytest.fixture(scope="session")
def demo_scenario(tmp_path_factory: pytest.TempPathFactory) -> SimpleNamespace:
    """The packaged ten-cycle scenario, assembled once through the CLI.

    Building it compiles the seed dozens of times to calibrate instance
    difficulty, so the fixture is session scoped and shared by the demo
    shape tests and the end-to-end loop runs.
    """
    require_compiler()
    dest = tmp_path_factory.mktemp("demo") / "scenario"
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        rc = cli_main(["demo", str(dest)])
    assert rc == 0, f"demo scenario build failed: {err.getvalue()}"
    return SimpleNamespace(
        root=dest,
        config=dest / "config.json",
        steps=dest / "steps.json",
        stdout=out.getvalue(),
    )
