"""Subprocess benchmark execution under wall-clock and memory limits.

Each job gets its own scratch directory and process group; timeouts kill the
whole group. Peak memory is sampled at 100 ms over the process tree. One
failed run never aborts a sweep: it becomes a record.
"""

from __future__ import annotations

import json
import logging
import os
import re
import signal
import subprocess
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

try:
    import psutil
except ImportError:  # pragma: no cover - dependency is declared, belt and braces
    psutil = None

from .formula import ClaimKind, SolverClaim, SolverOutputError, parse_solver_output

log = logging.getLogger(__name__)

MEM_SAMPLE_INTERVAL = 0.1
_COST_RE = re.compile(r"^c\s+cost\s+(\d+)\s*$", re.MULTILINE)


class RunnerError(Exception):
    pass


class SpawnFailure(RunnerError):
    pass


class Outcome(str, Enum):
    SOLVED_SAT = "SolvedSat"
    SOLVED_UNSAT = "SolvedUnsat"
    TIMEOUT = "Timeout"
    CRASHED = "Crashed"
    MEMOUT = "MemOut"
    MALFORMED = "Malformed"
    UNKNOWN = "Unknown"


SOLVED_OUTCOMES = (Outcome.SOLVED_SAT, Outcome.SOLVED_UNSAT)


@dataclass(frozen=True)
class ResourceLimits:
    wall_timeout: float = 5000.0
    mem_limit: Optional[int] = None  # bytes, enforced by sampling

    def __post_init__(self) -> None:
        if self.wall_timeout <= 0:
            raise ValueError("wall_timeout must be positive")
        if self.mem_limit is not None and self.mem_limit <= 0:
            raise ValueError("mem_limit must be positive")


@dataclass(frozen=True)
class RunRecord:
    instance: str
    outcome: Outcome
    wall_time: float
    peak_mem: Optional[int] = None  # bytes; None when sampling failed
    claim: Optional[SolverClaim] = None
    proof_path: Optional[str] = None
    signal: Optional[int] = None
    detail: Optional[str] = None
    cost: Optional[int] = None  # solver-reported deterministic work counter
    peak_procs: Optional[int] = None  # max processes+threads seen (discipline probe)

    @property
    def solved(self) -> bool:
        return self.outcome in SOLVED_OUTCOMES

    def to_json_dict(self) -> dict:
        return {
            "instance": self.instance,
            "outcome": self.outcome.value,
            "wall_time": self.wall_time,
            "peak_mem": self.peak_mem,
            "claim_kind": self.claim.kind.value if self.claim else None,
            "raw_exit": self.claim.raw_exit if self.claim else None,
            "proof_path": self.proof_path,
            "signal": self.signal,
            "detail": self.detail,
            "cost": self.cost,
            "peak_procs": self.peak_procs,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RunRecord":
        claim = None
        if d.get("claim_kind"):
            claim = SolverClaim(kind=ClaimKind(d["claim_kind"]), raw_exit=d.get("raw_exit") or 0)
        return cls(
            instance=d["instance"],
            outcome=Outcome(d["outcome"]),
            wall_time=float(d["wall_time"]),
            peak_mem=d.get("peak_mem"),
            claim=claim,
            proof_path=d.get("proof_path"),
            signal=d.get("signal"),
            detail=d.get("detail"),
            cost=d.get("cost"),
            peak_procs=d.get("peak_procs"),
        )


class _TreeSampler(threading.Thread):
    """Samples RSS and process/thread counts of a process tree at 100 ms."""

    def __init__(self, pid: int, mem_limit: Optional[int]) -> None:
        super().__init__(daemon=True)
        self.pid = pid
        self.mem_limit = mem_limit
        self.peak_rss: Optional[int] = None
        self.peak_procs: Optional[int] = None
        self.memout = False
        self._halt = threading.Event()

    def run(self) -> None:
        if psutil is None:
            return
        try:
            root = psutil.Process(self.pid)
        except psutil.Error:
            return
        while not self._halt.is_set():
            try:
                procs = [root] + root.children(recursive=True)
                rss = 0
                nthreads = 0
                for p in procs:
                    try:
                        rss += p.memory_info().rss
                        nthreads += p.num_threads()
                    except psutil.Error:
                        continue
                if self.peak_rss is None or rss > self.peak_rss:
                    self.peak_rss = rss
                if self.peak_procs is None or nthreads > self.peak_procs:
                    self.peak_procs = nthreads
                if self.mem_limit is not None and rss > self.mem_limit:
                    self.memout = True
                    _kill_group(self.pid)
                    return
            except psutil.Error:
                return
            self._halt.wait(MEM_SAMPLE_INTERVAL)

    def stop(self) -> None:
        self._halt.set()


def _kill_group(pid: int) -> None:
    try:
        os.killpg(os.getpgid(pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError, OSError):
        pass


def run_instance(
    run_script: str | Path,
    instance: str | Path,
    limits: ResourceLimits,
    scratch_dir: Optional[str | Path] = None,
    proof_path: Optional[str | Path] = None,
    time_source: str = "wall",
    cost_scale: float = 1000.0,
) -> RunRecord:
    """Run one solver invocation: `bash run_script <instance> <proof_path>`.

    The proof path defaults to `<instance stem>.drat` inside the scratch
    directory. With time_source="reported", a solver-printed `c cost N` line
    supplies a deterministic wall_time (N / cost_scale) for solved records;
    wall-clock still enforces the timeout.
    """
    instance = Path(instance)
    name = instance.name
    if scratch_dir is None:
        scratch = Path(tempfile.mkdtemp(prefix="satevo-run-"))
    else:
        scratch = Path(scratch_dir)
        scratch.mkdir(parents=True, exist_ok=True)
    if proof_path is None:
        proof_path = scratch / (instance.stem + ".drat")
    proof_path = Path(proof_path)

    cmd = ["bash", str(run_script), str(instance), str(proof_path)]
    start = time.monotonic()
    try:
        proc = subprocess.Popen(
            cmd,
            cwd=scratch,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            start_new_session=True,
        )
    except OSError as exc:
        raise SpawnFailure(f"{name}: failed to spawn solver: {exc}") from exc

    sampler = _TreeSampler(proc.pid, limits.mem_limit)
    sampler.start()
    timed_out = False
    try:
        out, err = proc.communicate(timeout=limits.wall_timeout)
    except subprocess.TimeoutExpired:
        timed_out = True
        _kill_group(proc.pid)
        out, err = proc.communicate()
    wall = time.monotonic() - start
    sampler.stop()
    sampler.join(timeout=2.0)

    stdout = (out or b"").decode("utf-8", errors="replace")
    cost = None
    m = None
    for m in _COST_RE.finditer(stdout):
        pass
    if m is not None:
        cost = int(m.group(1))

    common = dict(
        instance=name,
        peak_mem=sampler.peak_rss,
        peak_procs=sampler.peak_procs,
        cost=cost,
    )

    if sampler.memout:
        return RunRecord(outcome=Outcome.MEMOUT, wall_time=wall, **common)
    if timed_out:
        # Clamp: a timeout record reports exactly the limit.
        return RunRecord(outcome=Outcome.TIMEOUT, wall_time=limits.wall_timeout, **common)
    if proc.returncode < 0:
        return RunRecord(
            outcome=Outcome.CRASHED,
            wall_time=wall,
            signal=-proc.returncode,
            detail=f"killed by signal {-proc.returncode}",
            **common,
        )

    try:
        claim = parse_solver_output(stdout, proc.returncode)
    except SolverOutputError as exc:
        return RunRecord(outcome=Outcome.MALFORMED, wall_time=wall, detail=str(exc), **common)

    if time_source == "reported" and cost is not None:
        wall = min(cost / cost_scale, limits.wall_timeout)

    if claim.kind is ClaimKind.SAT:
        return RunRecord(outcome=Outcome.SOLVED_SAT, wall_time=wall, claim=claim, **common)
    if claim.kind is ClaimKind.UNSAT:
        claim = replace(claim, proof_path=str(proof_path))
        return RunRecord(
            outcome=Outcome.SOLVED_UNSAT,
            wall_time=wall,
            claim=claim,
            proof_path=str(proof_path),
            **common,
        )
    return RunRecord(outcome=Outcome.UNKNOWN, wall_time=wall, claim=claim, **common)


def run_benchmark(
    run_script: str | Path,
    instances: Sequence[str | Path],
    limits: ResourceLimits,
    parallelism: int = 1,
    workdir: Optional[str | Path] = None,
    progress: Optional[Callable[[RunRecord], None]] = None,
    time_source: str = "wall",
    cost_scale: float = 1000.0,
) -> list[RunRecord]:
    """Run a suite through a worker pool; returns records ordered by instance name.

    Exactly one record per instance. A spawn failure becomes a Malformed
    record rather than aborting the sweep. Scratch directories (and any proof
    files) live under `workdir` and are left in place for later validation.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    if workdir is None:
        workdir = tempfile.mkdtemp(prefix="satevo-bench-")
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)

    paths = sorted((Path(p) for p in instances), key=lambda p: p.name)

    def job(path: Path) -> RunRecord:
        scratch = workdir / path.stem
        try:
            rec = run_instance(
                run_script,
                path,
                limits,
                scratch_dir=scratch,
                time_source=time_source,
                cost_scale=cost_scale,
            )
        except SpawnFailure as exc:
            rec = RunRecord(
                instance=path.name,
                outcome=Outcome.MALFORMED,
                wall_time=0.0,
                detail=str(exc),
            )
        if progress is not None:
            progress(rec)
        return rec

    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        records = list(pool.map(job, paths))
    records.sort(key=lambda r: r.instance)
    return records


def pair_run(
    run_script_a: str | Path,
    run_script_b: str | Path,
    instances: Sequence[str | Path],
    limits: ResourceLimits,
    parallelism: int = 1,
    workdir: Optional[str | Path] = None,
    time_source: str = "wall",
    cost_scale: float = 1000.0,
) -> tuple[list[RunRecord], list[RunRecord]]:
    """A/B sweep: both variants over the identical suite, jobs interleaved in one pool."""
    if workdir is None:
        workdir = tempfile.mkdtemp(prefix="satevo-pair-")
    workdir = Path(workdir)
    paths = sorted((Path(p) for p in instances), key=lambda p: p.name)

    jobs: list[tuple[str, Path]] = []
    for p in paths:
        jobs.append(("a", p))
        jobs.append(("b", p))

    def job(item: tuple[str, Path]) -> tuple[str, RunRecord]:
        side, path = item
        script = run_script_a if side == "a" else run_script_b
        scratch = workdir / side / path.stem
        try:
            rec = run_instance(
                script, path, limits, scratch_dir=scratch,
                time_source=time_source, cost_scale=cost_scale,
            )
        except SpawnFailure as exc:
            rec = RunRecord(
                instance=path.name, outcome=Outcome.MALFORMED, wall_time=0.0, detail=str(exc)
            )
        return side, rec

    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        results = list(pool.map(job, jobs))

    recs_a = sorted((r for s, r in results if s == "a"), key=lambda r: r.instance)
    recs_b = sorted((r for s, r in results if s == "b"), key=lambda r: r.instance)
    return recs_a, recs_b


def save_records_jsonl(path: str | Path, records: Iterable[RunRecord]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_dict(), sort_keys=True) + "\n")


def load_records_jsonl(path: str | Path) -> list[RunRecord]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(RunRecord.from_json_dict(json.loads(line)))
    return records
