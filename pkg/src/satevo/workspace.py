"""Variant workspace handling: layout checks, builds, lineage docs.

Every solver variant lives in its own directory with a fixed shape:

    bin/            starexec_run_default + the built binary
    src/            solver sources
    build/          build system files
    CHANGELOG.md    implemented changes, append-only
    HYPOTHESIS.md   planned modifications and the performance rationale
    RESULTS.md      evaluation conclusions, append-only
    starexec_build  root build script; run as `bash starexec_build`

The layout check is the first gate a candidate passes through, before any
compile or test work is spent on it.
"""

from __future__ import annotations

import hashlib
import logging
import os
import shutil
import signal
import subprocess
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterator, Optional, Tuple

log = logging.getLogger(__name__)

MANDATORY_DIRS = ("bin", "src", "build")
MANDATORY_DOCS = ("CHANGELOG.md", "HYPOTHESIS.md", "RESULTS.md")
BUILD_SCRIPT = "starexec_build"
RUN_SCRIPT = "starexec_run_default"
BINARY_NAME = "solver_binary"

DEFAULT_BUILD_TIMEOUT = 600.0


class WorkspaceError(Exception):
    pass


class NotADirectory(WorkspaceError):
    pass


class ScriptMissing(WorkspaceError):
    pass


class BuildTimeout(WorkspaceError):
    def __init__(self, root: Path, limit: float) -> None:
        super().__init__(f"build of {root} exceeded {limit:.0f}s")
        self.root = root
        self.limit = limit


class DocsWriteFailure(WorkspaceError):
    pass


@dataclass(frozen=True)
class SolverVariant:
    """A layout-validated solver directory."""

    id: str
    root: Path
    binary: Path
    build_script: Path
    run_script: Path
    docs: Dict[str, bool] = field(default_factory=dict)

    @property
    def changelog(self) -> Path:
        return self.root / "CHANGELOG.md"

    @property
    def hypothesis(self) -> Path:
        return self.root / "HYPOTHESIS.md"

    @property
    def results(self) -> Path:
        return self.root / "RESULTS.md"


@dataclass(frozen=True)
class BuildResult:
    success: bool
    diagnostics: str
    duration: float
    binary_hash: Optional[str] = None

    def to_json_dict(self) -> dict:
        return {
            "success": self.success,
            "diagnostics": self.diagnostics,
            "duration": self.duration,
            "binary_hash": self.binary_hash,
        }


@dataclass(frozen=True)
class LayoutReport:
    ok: bool
    violations: Tuple[str, ...]
    variant: Optional[SolverVariant] = None


def validate_layout(root: Path, variant_id: Optional[str] = None) -> LayoutReport:
    """Check a directory against the mandatory variant shape.

    Reports every missing or unexpected top-level element by name so the
    feedback document can list them all at once. Dotfiles are tolerated
    (editors and build caches drop them).
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectory(str(root))

    violations = []
    for name in MANDATORY_DIRS:
        p = root / name
        if not p.exists():
            violations.append(f"{name}/ absent")
        elif not p.is_dir():
            violations.append(f"{name} is not a directory")
    docs = {}
    for name in MANDATORY_DOCS:
        p = root / name
        docs[name] = p.is_file()
        if not docs[name]:
            violations.append(f"{name} absent")
    build_script = root / BUILD_SCRIPT
    if not build_script.is_file():
        violations.append(f"{BUILD_SCRIPT} absent")

    run_script = root / "bin" / RUN_SCRIPT
    if (root / "bin").is_dir() and not run_script.is_file():
        violations.append(f"bin/{RUN_SCRIPT} absent")

    expected = set(MANDATORY_DIRS) | set(MANDATORY_DOCS) | {BUILD_SCRIPT}
    for entry in sorted(root.iterdir()):
        if entry.name.startswith("."):
            continue
        if entry.name not in expected:
            violations.append(f"unexpected top-level entry: {entry.name}")

    if violations:
        return LayoutReport(ok=False, violations=tuple(violations))

    variant = SolverVariant(
        id=variant_id or root.name,
        root=root,
        binary=root / "bin" / BINARY_NAME,
        build_script=build_script,
        run_script=run_script,
        docs=docs,
    )
    return LayoutReport(ok=True, violations=(), variant=variant)


def build_variant(
    variant: SolverVariant,
    timeout: float = DEFAULT_BUILD_TIMEOUT,
) -> BuildResult:
    """Run the variant's build script and report what came out.

    The script runs in its own process group so a hung compiler tree can be
    killed wholesale. Success requires a zero exit status and an executable
    binary at bin/solver_binary; all compiler output is captured verbatim
    because it feeds straight into agent feedback.
    """
    if not variant.build_script.is_file():
        raise ScriptMissing(str(variant.build_script))

    start = time.monotonic()
    proc = subprocess.Popen(
        ["bash", BUILD_SCRIPT],
        cwd=variant.root,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
        start_new_session=True,
    )
    try:
        out, err = proc.communicate(timeout=timeout)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        proc.wait()
        raise BuildTimeout(variant.root, timeout) from None
    duration = time.monotonic() - start

    diagnostics = ""
    if out:
        diagnostics += out
    if err:
        if diagnostics and not diagnostics.endswith("\n"):
            diagnostics += "\n"
        diagnostics += err

    binary_ok = variant.binary.is_file() and os.access(variant.binary, os.X_OK)
    success = proc.returncode == 0 and binary_ok
    if proc.returncode == 0 and not binary_ok:
        diagnostics += f"\nbuild exited 0 but {variant.binary} is missing or not executable\n"

    digest = _hash_file(variant.binary) if binary_ok else None
    log.info(
        "build %s: rc=%d success=%s %.2fs", variant.id, proc.returncode, success, duration
    )
    return BuildResult(
        success=success,
        diagnostics=diagnostics,
        duration=duration,
        binary_hash=digest,
    )


def _hash_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def variant_sources(root: Path) -> Iterator[Path]:
    """All files that define a variant's behaviour (sources + build scripts)."""
    root = Path(root)
    yield root / BUILD_SCRIPT
    for sub in ("src", "build"):
        base = root / sub
        if base.is_dir():
            for p in sorted(base.rglob("*")):
                if p.is_file():
                    yield p
    run_script = root / "bin" / RUN_SCRIPT
    if run_script.is_file():
        yield run_script


def source_digest(root: Path) -> str:
    """Stable digest over a variant's source tree (paths + contents)."""
    h = hashlib.sha256()
    root = Path(root)
    for p in variant_sources(root):
        if not p.is_file():
            continue
        h.update(str(p.relative_to(root)).encode())
        h.update(b"\0")
        h.update(p.read_bytes())
        h.update(b"\0")
    return h.hexdigest()


def clone_variant(src_root: Path, dst_root: Path) -> Path:
    """Copy a variant tree to a new root, preserving permission bits.

    Built binaries are not carried over: the copy must prove it still
    compiles on its own.
    """
    src_root = Path(src_root)
    dst_root = Path(dst_root)
    if dst_root.exists():
        raise WorkspaceError(f"destination already exists: {dst_root}")
    shutil.copytree(src_root, dst_root)
    stale = dst_root / "bin" / BINARY_NAME
    if stale.exists():
        stale.unlink()
    return dst_root


def record_lineage(
    variant: SolverVariant,
    heading: str,
    changes: str,
    conclusions: str,
    timestamp: Optional[str] = None,
) -> None:
    """Append one cycle's story to CHANGELOG.md and RESULTS.md.

    Both files are append-only; prior sections are never rewritten. The
    timestamp can be pinned by the caller for reproducible transcripts.
    """
    ts = timestamp or datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%S UTC")
    try:
        with open(variant.changelog, "a", encoding="utf-8") as fh:
            fh.write(f"\n## {heading} ({ts})\n\n{changes.rstrip()}\n")
        with open(variant.results, "a", encoding="utf-8") as fh:
            fh.write(f"\n## {heading} ({ts})\n\n{conclusions.rstrip()}\n")
    except OSError as exc:
        raise DocsWriteFailure(f"could not update lineage docs under {variant.root}: {exc}")
