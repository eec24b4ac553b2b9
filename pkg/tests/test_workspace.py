"""Variant directory shape, builds, cloning, digests, and lineage docs."""

from __future__ import annotations

import os
import stat
from pathlib import Path

import pytest

from satevo.workspace import (
    BuildTimeout,
    NotADirectory,
    ScriptMissing,
    WorkspaceError,
    build_variant,
    clone_variant,
    record_lineage,
    source_digest,
    validate_layout,
    variant_sources,
)


def make_layout(root: Path) -> Path:
    """A minimal valid variant tree with a trivially compiling build script."""
    for sub in ("bin", "src", "build"):
        (root / sub).mkdir(parents=True)
    for doc in ("CHANGELOG.md", "HYPOTHESIS.md", "RESULTS.md"):
        (root / doc).write_text(f"# {doc}\n")
    (root / "src" / "solver.c").write_text("int main(void) { return 0; }\n")
    (root / "starexec_build").write_text(
        "#!/usr/bin/env bash\nset -e\ncc -O1 -o bin/solver_binary src/solver.c\n"
    )
    (root / "bin" / "starexec_run_default").write_text(
        '#!/usr/bin/env bash\nexec "$(dirname "$0")/solver_binary" "$@"\n'
    )
    for rel in ("starexec_build", "bin/starexec_run_default"):
        p = root / rel
        p.chmod(p.stat().st_mode | stat.S_IXUSR)
    return root


class TestValidateLayout:
    def test_full_layout_passes(self, tmp_path):
        root = make_layout(tmp_path / "v")
        report = validate_layout(root, variant_id="v0")
        assert report.ok
        assert report.violations == ()
        assert report.variant is not None
        assert report.variant.id == "v0"
        assert report.variant.binary == root / "bin" / "solver_binary"

    def test_variant_id_defaults_to_directory_name(self, tmp_path):
        root = make_layout(tmp_path / "champ")
        assert validate_layout(root).variant.id == "champ"

    def test_missing_pieces_all_reported(self, tmp_path):
        root = tmp_path / "v"
        root.mkdir()
        report = validate_layout(root)
        assert not report.ok
        required = {
            "bin/ absent",
            "src/ absent",
            "build/ absent",
            "CHANGELOG.md absent",
            "HYPOTHESIS.md absent",
            "RESULTS.md absent",
            "starexec_build absent",
        }
        assert required <= set(report.violations)

    def test_doc_as_directory_is_a_violation(self, tmp_path):
        root = make_layout(tmp_path / "v")
        (root / "CHANGELOG.md").unlink()
        (root / "CHANGELOG.md").mkdir()
        report = validate_layout(root)
        assert not report.ok
        assert "CHANGELOG.md absent" in report.violations

    def test_unexpected_top_level_entry(self, tmp_path):
        root = make_layout(tmp_path / "v")
        (root / "notes.txt").write_text("scratch\n")
        report = validate_layout(root)
        assert not report.ok
        assert "unexpected top-level entry: notes.txt" in report.violations

    def test_dotfiles_tolerated(self, tmp_path):
        root = make_layout(tmp_path / "v")
        (root / ".editor-cache").write_text("junk\n")
        assert validate_layout(root).ok

    def test_missing_run_script(self, tmp_path):
        root = make_layout(tmp_path / "v")
        (root / "bin" / "starexec_run_default").unlink()
        report = validate_layout(root)
        assert not report.ok
        assert "bin/starexec_run_default absent" in report.violations

    def test_not_a_directory(self, tmp_path):
        with pytest.raises(NotADirectory):
            validate_layout(tmp_path / "missing")


class TestBuildVariant:
    def test_successful_build(self, tmp_path):
        root = make_layout(tmp_path / "v")
        variant = validate_layout(root).variant
        result = build_variant(variant)
        assert result.success
        assert result.binary_hash is not None
        assert result.duration > 0
        assert variant.binary.is_file()
        assert os.access(variant.binary, os.X_OK)

    def test_compile_error_reported_with_diagnostics(self, tmp_path):
        root = make_layout(tmp_path / "v")
        (root / "src" / "solver.c").write_text("int main(void) { return 0 }\n")
        variant = validate_layout(root).variant
        result = build_variant(variant)
        assert not result.success
        assert result.binary_hash is None
        assert "error" in result.diagnostics.lower()

    def test_zero_exit_without_binary_fails(self, tmp_path):
        root = make_layout(tmp_path / "v")
        (root / "starexec_build").write_text("#!/usr/bin/env bash\ntrue\n")
        variant = validate_layout(root).variant
        result = build_variant(variant)
        assert not result.success
        assert "missing or not executable" in result.diagnostics

    def test_build_timeout_kills_the_tree(self, tmp_path):
        root = make_layout(tmp_path / "v")
        (root / "starexec_build").write_text("#!/usr/bin/env bash\nsleep 60\n")
        variant = validate_layout(root).variant
        with pytest.raises(BuildTimeout):
            build_variant(variant, timeout=0.5)

    def test_missing_build_script(self, tmp_path):
        root = make_layout(tmp_path / "v")
        variant = validate_layout(root).variant
        (root / "starexec_build").unlink()
        with pytest.raises(ScriptMissing):
            build_variant(variant)

    def test_identical_sources_identical_binary_hash(self, tmp_path):
        a = validate_layout(make_layout(tmp_path / "a")).variant
        b = validate_layout(make_layout(tmp_path / "b")).variant
        assert build_variant(a).binary_hash == build_variant(b).binary_hash


class TestCloneAndDigest:
    def test_clone_drops_stale_binary(self, tmp_path):
        root = make_layout(tmp_path / "v")
        variant = validate_layout(root).variant
        assert build_variant(variant).success
        dst = clone_variant(root, tmp_path / "copy")
        assert not (dst / "bin" / "solver_binary").exists()
        assert validate_layout(dst).ok
        assert build_variant(validate_layout(dst).variant).success

    def test_clone_preserves_exec_bits(self, tmp_path):
        root = make_layout(tmp_path / "v")
        dst = clone_variant(root, tmp_path / "copy")
        assert os.access(dst / "starexec_build", os.X_OK)
        assert os.access(dst / "bin" / "starexec_run_default", os.X_OK)

    def test_clone_refuses_existing_destination(self, tmp_path):
        root = make_layout(tmp_path / "v")
        (tmp_path / "copy").mkdir()
        with pytest.raises(WorkspaceError):
            clone_variant(root, tmp_path / "copy")

    def test_source_digest_tracks_sources_only(self, tmp_path):
        root = make_layout(tmp_path / "v")
        before = source_digest(root)
        # Docs do not contribute to the behavioural identity.
        (root / "RESULTS.md").write_text("# changed\n")
        assert source_digest(root) == before
        (root / "src" / "solver.c").write_text("int main(void) { return 1; }\n")
        assert source_digest(root) != before

    def test_digest_equal_across_clones(self, tmp_path):
        root = make_layout(tmp_path / "v")
        dst = clone_variant(root, tmp_path / "copy")
        assert source_digest(root) == source_digest(dst)

    def test_variant_sources_cover_build_and_run_scripts(self, tmp_path):
        root = make_layout(tmp_path / "v")
        rels = {str(p.relative_to(root)) for p in variant_sources(root)}
        assert "starexec_build" in rels
        assert "src/solver.c" in rels
        assert "bin/starexec_run_default" in rels
        assert not any(r.endswith(".md") for r in rels)


class TestRecordLineage:
    def test_appends_to_changelog_and_results(self, tmp_path):
        root = make_layout(tmp_path / "v")
        variant = validate_layout(root).variant
        record_lineage(variant, "cycle 1", "tried X", "X helped", timestamp="2000-01-01")
        record_lineage(variant, "cycle 2", "tried Y", "Y hurt", timestamp="2000-01-02")
        changelog = variant.changelog.read_text()
        results = variant.results.read_text()
        assert "## cycle 1 (2000-01-01)" in changelog
        assert "tried Y" in changelog
        assert changelog.index("cycle 1") < changelog.index("cycle 2")
        assert "X helped" in results
        assert "Y hurt" in results
        assert "tried X" not in results
