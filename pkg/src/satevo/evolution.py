"""Champion/challenger evolution loop.

One cycle: ask the agent for a plan, clone the champion, apply the agent's
edits, then march the candidate through layout validation, compliance
scanning, a build, the two correctness gates, and finally a benchmark
sweep. Only a strict objective improvement replaces the champion; every
other outcome is a Rejected decision with feedback routed into the next
cycle's context. After each cycle a post-mortem feeds the rulebase.

Runs are resumable (state.json) and, with the scripted agent backend and
reported-cost timing, fully deterministic: two runs from the same config
produce byte-identical trajectory files.
"""

from __future__ import annotations

import difflib
import json
import logging
import os
import shutil
import time
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

from .agents import (
    AgentContext,
    AgentPatchSet,
    BackendTimeout,
    BackendUnavailable,
    EditOutsideWorkspace,
    HttpBackend,
    ReplayExhausted,
    ScriptedBackend,
    apply_patchset,
)
from .gates import (
    GateVerdict,
    craft_feedback,
    load_suite,
    stage1_smoke,
    stage2_validate,
)
from .metrics import EvaluationReport, VbsTable, build_report
from .rules import (
    ComplianceReport,
    RuleSet,
    analyze_failures,
    compliance_check,
    evolve_rules,
    load_rules,
    write_seed_rules,
)
from .runner import (
    ResourceLimits,
    RunRecord,
    load_records_jsonl,
    pair_run,
    run_benchmark,
    save_records_jsonl,
)
from .workspace import (
    BuildResult,
    BuildTimeout,
    SolverVariant,
    build_variant,
    clone_variant,
    record_lineage,
    validate_layout,
)

log = logging.getLogger(__name__)

TRAJECTORY_HEADER = (
    "cycle,variant,decision,objective_kind,objective_value,"
    "champion_objective,champion_par2"
)

_ADDED_LINES_CAP = 40


class EvolutionError(Exception):
    pass


class SeedRejected(EvolutionError):
    pass


class Decision(str, Enum):
    ACCEPTED = "Accepted"
    REJECTED_GATE = "RejectedGate"
    REJECTED_COMPLIANCE = "RejectedCompliance"
    REJECTED_REGRESSION = "RejectedRegression"


@dataclass(frozen=True)
class Objective:
    """What "better" means, and when the meaning changes.

    The run starts comparing on `kind` and switches to PAR-2 once the cycle
    index reaches `switch_cycle` (counting solved instances rewards breadth
    early; PAR-2 sharpens the signal once the solver is competent).
    """

    kind: str = "SolvedCount"
    switch_cycle: int = 33

    def __post_init__(self) -> None:
        if self.kind not in ("SolvedCount", "Par2"):
            raise ValueError(f"unknown objective kind: {self.kind}")
        if self.switch_cycle < 0:
            raise ValueError("switch_cycle must be >= 0")

    def active_kind(self, cycle: int) -> str:
        return "Par2" if cycle >= self.switch_cycle else self.kind

    @staticmethod
    def value_from(report: EvaluationReport, kind: str) -> float:
        if kind == "SolvedCount":
            return float(report.solved)
        return report.par2_overall

    @staticmethod
    def improved(kind: str, candidate: float, champion: float, epsilon: float) -> bool:
        """Strict improvement; ties keep the incumbent."""
        if kind == "SolvedCount":
            return candidate > champion + epsilon
        return candidate < champion - epsilon


@dataclass
class EvolutionConfig:
    work_dir: Path
    seed_dir: Path
    smoke_suite: Path
    validation_suite: Path
    bench_suite: Path
    vbs_table: Path
    backend_kind: str = "scripted"  # scripted | http
    backend_arg: str = ""
    objective: Objective = field(default_factory=Objective)
    epsilon: float = 0.0
    parallelism: int = 4
    bench_timeout: float = 300.0
    stage1_timeout: float = 30.0
    stage2_timeout: float = 300.0
    build_timeout: float = 600.0
    mem_limit: Optional[int] = None
    time_source: str = "wall"  # wall | reported (deterministic cost accounting)
    cost_scale: float = 1000.0
    par_factor: float = 2.0
    variant_prefix: str = "EVO"
    ab_rerun_champion: bool = False
    proof_check_fraction: float = 1.0
    seed_standings: str = ""

    def __post_init__(self) -> None:
        for name in ("work_dir", "seed_dir", "smoke_suite", "validation_suite",
                     "bench_suite", "vbs_table"):
            setattr(self, name, Path(getattr(self, name)))
        if self.time_source not in ("wall", "reported"):
            raise ValueError("time_source must be 'wall' or 'reported'")

    def validate_paths(self) -> None:
        for name in ("seed_dir", "smoke_suite", "validation_suite", "bench_suite"):
            p = getattr(self, name)
            if not p.is_dir():
                raise EvolutionError(f"{name} is not a directory: {p}")
        if not self.vbs_table.is_file():
            raise EvolutionError(f"vbs_table is not a file: {self.vbs_table}")

    @classmethod
    def from_json(cls, path: str | Path) -> "EvolutionConfig":
        """Load a config file; SATEVO_<FIELD> environment variables override.

        Relative paths in the file are resolved against the file's directory.
        """
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        obj = data.pop("objective", None)
        cfg_kwargs = dict(data)
        if obj is not None:
            cfg_kwargs["objective"] = Objective(**obj)
        config = cls(**cfg_kwargs)

        base = path.parent
        for name in ("work_dir", "seed_dir", "smoke_suite", "validation_suite",
                     "bench_suite", "vbs_table"):
            p = getattr(config, name)
            if not p.is_absolute():
                setattr(config, name, (base / p).resolve())
        if config.backend_kind == "scripted" and config.backend_arg:
            arg = Path(config.backend_arg)
            if not arg.is_absolute():
                config.backend_arg = str((base / arg).resolve())

        for f in fields(cls):
            env = os.environ.get(f"SATEVO_{f.name.upper()}")
            if env is None:
                continue
            current = getattr(config, f.name)
            if isinstance(current, bool):
                setattr(config, f.name, env.lower() in ("1", "true", "yes"))
            elif isinstance(current, int) and not isinstance(current, bool):
                setattr(config, f.name, int(env))
            elif isinstance(current, float):
                setattr(config, f.name, float(env))
            elif isinstance(current, Path):
                setattr(config, f.name, Path(env))
            elif isinstance(current, str) or current is None:
                setattr(config, f.name, env)
        return config


@dataclass
class CycleRecord:
    cycle: int
    variant_id: str
    decision: Decision
    objective_kind: str = ""
    objective_value: Optional[float] = None
    champion_objective: Optional[float] = None
    champion_par2: Optional[float] = None
    patch_digest: str = ""
    plan: str = ""
    intent: str = ""
    notes: str = ""
    added_lines: Tuple[str, ...] = ()
    build: Optional[BuildResult] = None
    verdicts: Tuple[GateVerdict, ...] = ()
    compliance: Optional[ComplianceReport] = None
    report: Optional[EvaluationReport] = None
    rule_snapshot: Optional[str] = None
    rule_patches: int = 0
    duration: float = 0.0

    @property
    def cycle_id(self) -> str:
        return str(self.cycle)

    @property
    def objective_note(self) -> str:
        if self.objective_value is None or self.champion_objective is None:
            return ""
        return (
            f"{self.objective_kind}: candidate {self.objective_value:g} did not beat"
            f" champion {self.champion_objective:g}"
        )

    def replay_projection(self) -> dict:
        """Timing-free view of the cycle; identical across replays."""
        return {
            "cycle": self.cycle,
            "variant_id": self.variant_id,
            "decision": self.decision.value,
            "objective_kind": self.objective_kind,
            "objective_value": self.objective_value,
            "champion_objective": self.champion_objective,
            "champion_par2": self.champion_par2,
            "patch_digest": self.patch_digest,
            "notes": self.notes,
            "build_success": None if self.build is None else self.build.success,
            "gate_failures": [
                {"stage": v.stage, "failures": [f.to_json_dict() for f in v.failures]}
                for v in self.verdicts
            ],
            "compliance_findings": (
                []
                if self.compliance is None
                else [
                    {
                        "kind": f.kind,
                        "path": f.path,
                        "line": f.line,
                        "detail": f.detail,
                        "pattern": f.pattern,
                    }
                    for f in self.compliance.findings
                ]
            ),
            "rule_patches": self.rule_patches,
        }

    def to_json_dict(self) -> dict:
        d = self.replay_projection()
        d.update(
            {
                "plan": self.plan,
                "intent": self.intent,
                "added_lines": list(self.added_lines),
                "build": None if self.build is None else self.build.to_json_dict(),
                "report": None if self.report is None else self.report.to_json_dict(),
                "rule_snapshot": self.rule_snapshot,
                "duration": self.duration,
            }
        )
        return d


@dataclass
class ChampionState:
    variant: SolverVariant
    build: BuildResult
    report: EvaluationReport
    records: List[RunRecord]


@dataclass
class EvolutionResult:
    work_dir: Path
    seed_record: CycleRecord
    records: List[CycleRecord]
    champion: ChampionState
    trajectory_path: Path

    @property
    def accepted(self) -> List[CycleRecord]:
        return [r for r in self.records if r.decision is Decision.ACCEPTED]


def _make_backend(config: EvolutionConfig):
    if config.backend_kind == "scripted":
        return ScriptedBackend.from_file(config.backend_arg)
    if config.backend_kind == "http":
        return HttpBackend(config.backend_arg)
    raise EvolutionError(f"unknown backend kind: {config.backend_kind}")


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6f}"


class Evolution:
    """Owns one evolution run directory and its champion state."""

    def __init__(self, config: EvolutionConfig, backend=None) -> None:
        config.validate_paths()
        self.config = config
        self.backend = backend if backend is not None else _make_backend(config)
        self.work = Path(config.work_dir)
        self.cycles_dir = self.work / "cycles"
        self.cycles_dir.mkdir(parents=True, exist_ok=True)
        self.trajectory_path = self.work / "trajectory.csv"
        self.audit_path = self.work / "audit.jsonl"
        self.state_path = self.work / "state.json"

        rules_dir = self.work / "rules"
        if not rules_dir.is_dir():
            write_seed_rules(rules_dir)
        self.ruleset: RuleSet = load_rules(rules_dir)

        self.smoke = load_suite(config.smoke_suite)
        self.validation = load_suite(config.validation_suite)
        self.vbs = VbsTable.load(config.vbs_table)
        self.bench_instances = sorted(Path(config.bench_suite).glob("*.cnf"))
        if not self.bench_instances:
            raise EvolutionError(f"no .cnf instances under {config.bench_suite}")

        self.champion: Optional[ChampionState] = None
        self.next_cycle = 0
        self.last_feedback = ""

    # -- plumbing ----------------------------------------------------------

    def _audit(self, event: str, cycle: int, variant: str, **extra) -> None:
        entry = {"event": event, "cycle": cycle, "variant": variant}
        entry.update(extra)
        with open(self.audit_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def _trajectory_row(self, rec: CycleRecord) -> None:
        new = not self.trajectory_path.exists()
        with open(self.trajectory_path, "a", encoding="utf-8") as fh:
            if new:
                fh.write(TRAJECTORY_HEADER + "\n")
            fh.write(
                f"{rec.cycle},{rec.variant_id},{rec.decision.value},"
                f"{rec.objective_kind},{_fmt(rec.objective_value)},"
                f"{_fmt(rec.champion_objective)},{_fmt(rec.champion_par2)}\n"
            )

    def _cycle_dir(self, cycle: int) -> Path:
        return self.cycles_dir / f"cycle_{cycle:03d}"

    def _limits(self, timeout: float) -> ResourceLimits:
        return ResourceLimits(wall_timeout=timeout, mem_limit=self.config.mem_limit)

    def _bench(self, run_script: Path, workdir: Path) -> List[RunRecord]:
        return run_benchmark(
            run_script,
            self.bench_instances,
            self._limits(self.config.bench_timeout),
            parallelism=self.config.parallelism,
            workdir=workdir,
            time_source=self.config.time_source,
            cost_scale=self.config.cost_scale,
        )

    def _context(self) -> AgentContext:
        champion_report = None
        lineage = ""
        if self.champion is not None:
            champion_report = self.champion.report.to_json_dict()
            changelog = self.champion.variant.changelog
            if changelog.is_file():
                lines = changelog.read_text(encoding="utf-8").splitlines()
                lineage = "\n".join(lines[-30:])
        objective = self.config.objective
        return AgentContext(
            rule_summary=self.ruleset.summary(),
            rule_versions=self.ruleset.versions(),
            objective=(
                f"{objective.active_kind(self.next_cycle)} (switches to Par2 at"
                f" cycle {objective.switch_cycle})"
            ),
            champion_report=champion_report,
            last_feedback=self.last_feedback,
            lineage=lineage,
            seed_standings=self.config.seed_standings,
        )

    def _write_record(self, rec: CycleRecord) -> None:
        cycle_dir = self._cycle_dir(rec.cycle)
        cycle_dir.mkdir(parents=True, exist_ok=True)
        (cycle_dir / "record.json").write_text(
            json.dumps(rec.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    def _write_feedback(self, cycle: int, markdown: str) -> None:
        cycle_dir = self._cycle_dir(cycle)
        cycle_dir.mkdir(parents=True, exist_ok=True)
        (cycle_dir / "feedback.md").write_text(markdown, encoding="utf-8")
        self.last_feedback = markdown

    def _post_mortem(self, rec: CycleRecord) -> None:
        signatures = analyze_failures([rec])
        if not signatures:
            return
        patches, self.ruleset, snap = evolve_rules(self.ruleset, signatures)
        rec.rule_snapshot = snap
        rec.rule_patches = len(patches)

    def _save_state(self) -> None:
        if self.champion is None:
            return
        state = {
            "next_cycle": self.next_cycle,
            "champion_root": str(self.champion.variant.root),
            "champion_binary_hash": self.champion.build.binary_hash,
            "champion_report": self.champion.report.to_json_dict(),
            "champion_records": str(self._records_path(self.champion)),
            "last_feedback": self.last_feedback,
            "backend_cursor": getattr(self.backend, "cursor", None),
        }
        self.state_path.write_text(json.dumps(state, indent=2) + "\n", encoding="utf-8")

    def _records_path(self, champion: ChampionState) -> Path:
        return champion.variant.root.parent / "records.jsonl"

    def load_state(self) -> None:
        if not self.state_path.is_file():
            raise EvolutionError(f"nothing to resume: {self.state_path} missing")
        state = json.loads(self.state_path.read_text(encoding="utf-8"))
        layout = validate_layout(Path(state["champion_root"]))
        if not layout.ok:
            raise EvolutionError(f"resumed champion has layout violations: {layout.violations}")
        build = BuildResult(
            success=True,
            diagnostics="(restored from state)",
            duration=0.0,
            binary_hash=state["champion_binary_hash"],
        )
        report = EvaluationReport.from_json_dict(state["champion_report"])
        records = load_records_jsonl(state["champion_records"])
        self.champion = ChampionState(
            variant=layout.variant, build=build, report=report, records=records
        )
        self.next_cycle = int(state["next_cycle"])
        self.last_feedback = state.get("last_feedback", "")
        cursor = state.get("backend_cursor")
        if cursor is not None and isinstance(self.backend, ScriptedBackend):
            self.backend.seek(int(cursor))

    # -- seed --------------------------------------------------------------

    def seed(self) -> CycleRecord:
        """Install and fully qualify the seed solver as cycle 0's champion."""
        cycle = 0
        variant_id = f"{self.config.variant_prefix}_0"
        cycle_dir = self._cycle_dir(cycle)
        if cycle_dir.exists():
            shutil.rmtree(cycle_dir)
        cycle_dir.mkdir(parents=True)
        root = cycle_dir / variant_id
        shutil.copytree(self.config.seed_dir, root)

        t0 = time.monotonic()
        layout = validate_layout(root, variant_id)
        self._audit("layout", cycle, variant_id, ok=layout.ok)
        if not layout.ok:
            raise SeedRejected(f"seed layout violations: {', '.join(layout.violations)}")
        variant = layout.variant

        comp = compliance_check(variant, self.ruleset)
        self._audit("compliance", cycle, variant_id, ok=comp.compliant)
        if not comp.compliant:
            raise SeedRejected(f"seed not rule-compliant: {comp.to_markdown()}")

        try:
            build = build_variant(variant, timeout=self.config.build_timeout)
        except BuildTimeout as exc:
            raise SeedRejected(str(exc)) from None
        self._audit("build", cycle, variant_id, ok=build.success)
        if not build.success:
            raise SeedRejected(f"seed build failed:\n{build.diagnostics}")

        s1 = stage1_smoke(
            variant, self.smoke, self._limits(self.config.stage1_timeout),
            parallelism=self.config.parallelism, workdir=cycle_dir / "gate1",
        )
        self._audit("stage1", cycle, variant_id, ok=s1.passed)
        if not s1.passed:
            raise SeedRejected(f"seed failed stage 1: {s1.failures[0].detail}")
        s2 = stage2_validate(
            variant, self.validation, self._limits(self.config.stage2_timeout),
            parallelism=self.config.parallelism, workdir=cycle_dir / "gate2",
            proof_check_fraction=self.config.proof_check_fraction,
        )
        self._audit("stage2", cycle, variant_id, ok=s2.passed)
        if not s2.passed:
            raise SeedRejected(f"seed failed stage 2: {s2.failures[0].detail}")

        self._audit("bench", cycle, variant_id)
        records = self._bench(variant.run_script, cycle_dir / "bench")
        report = build_report(
            records, self.vbs, self.config.bench_timeout, self.config.par_factor
        )
        self._audit("report", cycle, variant_id, solved=report.solved)

        self.champion = ChampionState(
            variant=variant, build=build, report=report, records=list(records)
        )
        save_records_jsonl(self._records_path(self.champion), records)

        kind = self.config.objective.active_kind(cycle)
        value = Objective.value_from(report, kind)
        rec = CycleRecord(
            cycle=cycle,
            variant_id=variant_id,
            decision=Decision.ACCEPTED,
            objective_kind=kind,
            objective_value=value,
            champion_objective=value,
            champion_par2=report.par2_overall,
            plan="(seed)",
            notes="seed variant installed as champion",
            build=build,
            verdicts=(s1, s2),
            compliance=comp,
            report=report,
            duration=time.monotonic() - t0,
        )
        self._audit("decision", cycle, variant_id, decision=rec.decision.value)
        self._write_record(rec)
        self._trajectory_row(rec)
        self.next_cycle = 1
        self._save_state()
        log.info("seed qualified: %s=%s par2=%.3f", kind, value, report.par2_overall)
        return rec

    # -- one cycle ---------------------------------------------------------

    def run_cycle(self) -> CycleRecord:
        if self.champion is None:
            raise EvolutionError("no champion; run seed() first")
        cycle = self.next_cycle
        variant_id = f"{self.config.variant_prefix}_{cycle}"
        cycle_dir = self._cycle_dir(cycle)
        if cycle_dir.exists():
            shutil.rmtree(cycle_dir)
        cycle_dir.mkdir(parents=True)
        t0 = time.monotonic()
        rec = CycleRecord(
            cycle=cycle,
            variant_id=variant_id,
            decision=Decision.REJECTED_GATE,
            objective_kind=self.config.objective.active_kind(cycle),
        )

        def finish() -> CycleRecord:
            # Champion columns are filled on every row so the champion curve
            # stays readable through rejected cycles.
            if rec.champion_objective is None and self.champion is not None:
                rec.champion_objective = Objective.value_from(
                    self.champion.report, rec.objective_kind
                )
            if rec.champion_par2 is None and self.champion is not None:
                rec.champion_par2 = self.champion.report.par2_overall
            rec.duration = time.monotonic() - t0
            self._audit("decision", cycle, variant_id, decision=rec.decision.value)
            self._post_mortem(rec)
            self._write_record(rec)
            self._trajectory_row(rec)
            self.next_cycle = cycle + 1
            self._save_state()
            return rec

        # Plan
        context = self._context()
        try:
            plan = self.backend.plan(context)
        except (BackendUnavailable, BackendTimeout) as exc:
            rec.notes = f"agent backend failed during planning: {exc}"
            return finish()
        rec.plan = plan
        self._audit("plan", cycle, variant_id)

        # Code
        root = cycle_dir / variant_id
        clone_variant(self.champion.variant.root, root)
        try:
            patchset = self.backend.code(plan, root)
        except (BackendUnavailable, BackendTimeout) as exc:
            rec.notes = f"agent backend failed during coding: {exc}"
            return finish()
        rec.patch_digest = patchset.digest
        rec.intent = patchset.intent
        self._audit("code", cycle, variant_id, digest=patchset.digest)

        if patchset.empty:
            rec.decision = Decision.REJECTED_COMPLIANCE
            rec.notes = "empty patch set (no-op cycle)"
            return finish()
        if not patchset.hypothesis.strip():
            rec.decision = Decision.REJECTED_COMPLIANCE
            rec.notes = "patch set carried no hypothesis"
            return finish()

        rec.added_lines = _added_lines(self.champion.variant.root, patchset)
        try:
            apply_patchset(patchset, root)
        except EditOutsideWorkspace as exc:
            rec.decision = Decision.REJECTED_COMPLIANCE
            rec.notes = str(exc)
            return finish()

        # Layout
        layout = validate_layout(root, variant_id)
        self._audit("layout", cycle, variant_id, ok=layout.ok)
        if not layout.ok:
            rec.decision = Decision.REJECTED_COMPLIANCE
            rec.notes = "layout violations: " + "; ".join(layout.violations)
            doc = craft_feedback([], None, layout_violations=layout.violations)
            self._write_feedback(cycle, doc.markdown)
            return finish()
        variant = layout.variant

        # Compliance
        comp = compliance_check(variant, self.ruleset)
        rec.compliance = comp
        self._audit("compliance", cycle, variant_id, ok=comp.compliant)
        if not comp.compliant:
            rec.decision = Decision.REJECTED_COMPLIANCE
            rec.notes = f"{len(comp.findings)} compliance finding(s)"
            doc = craft_feedback([], None, compliance_markdown=comp.to_markdown())
            self._write_feedback(cycle, doc.markdown)
            self._lineage(variant, rec)
            return finish()

        # Build
        try:
            build = build_variant(variant, timeout=self.config.build_timeout)
        except BuildTimeout as exc:
            build = BuildResult(
                success=False,
                diagnostics=str(exc),
                duration=self.config.build_timeout,
            )
        rec.build = build
        self._audit("build", cycle, variant_id, ok=build.success)
        if not build.success:
            rec.decision = Decision.REJECTED_GATE
            rec.notes = "build failed"
            doc = craft_feedback([], build)
            self._write_feedback(cycle, doc.markdown)
            self._lineage(variant, rec)
            return finish()

        if build.binary_hash == self.champion.build.binary_hash:
            rec.decision = Decision.REJECTED_REGRESSION
            rec.notes = "binary identical to champion; tie favors the incumbent"
            kind = self.config.objective.active_kind(cycle)
            rec.objective_kind = kind
            rec.objective_value = Objective.value_from(self.champion.report, kind)
            rec.champion_objective = rec.objective_value
            rec.champion_par2 = self.champion.report.par2_overall
            self._lineage(variant, rec)
            return finish()

        # Gates
        s1 = stage1_smoke(
            variant, self.smoke, self._limits(self.config.stage1_timeout),
            parallelism=self.config.parallelism, workdir=cycle_dir / "gate1",
        )
        rec.verdicts = (s1,)
        self._audit("stage1", cycle, variant_id, ok=s1.passed)
        if not s1.passed:
            rec.decision = Decision.REJECTED_GATE
            rec.notes = f"stage 1 failures: {len(s1.failures)}"
            doc = craft_feedback([s1], build)
            self._write_feedback(cycle, doc.markdown)
            self._lineage(variant, rec)
            return finish()

        s2 = stage2_validate(
            variant, self.validation, self._limits(self.config.stage2_timeout),
            parallelism=self.config.parallelism, workdir=cycle_dir / "gate2",
            proof_check_fraction=self.config.proof_check_fraction,
        )
        rec.verdicts = (s1, s2)
        self._audit("stage2", cycle, variant_id, ok=s2.passed)
        if not s2.passed:
            rec.decision = Decision.REJECTED_GATE
            rec.notes = f"stage 2 failures: {len(s2.failures)}"
            doc = craft_feedback([s1, s2], build)
            self._write_feedback(cycle, doc.markdown)
            self._lineage(variant, rec)
            return finish()

        # Benchmark
        self._audit("bench", cycle, variant_id)
        if self.config.ab_rerun_champion:
            champ_records, records = pair_run(
                self.champion.variant.run_script,
                variant.run_script,
                self.bench_instances,
                self._limits(self.config.bench_timeout),
                parallelism=self.config.parallelism,
                workdir=cycle_dir / "bench",
                time_source=self.config.time_source,
                cost_scale=self.config.cost_scale,
            )
            champion_report = build_report(
                champ_records, self.vbs, self.config.bench_timeout, self.config.par_factor
            )
        else:
            records = self._bench(variant.run_script, cycle_dir / "bench")
            champion_report = self.champion.report
        report = build_report(
            records, self.vbs, self.config.bench_timeout, self.config.par_factor
        )
        rec.report = report
        self._audit("report", cycle, variant_id, solved=report.solved)

        kind = self.config.objective.active_kind(cycle)
        cand_val = Objective.value_from(report, kind)
        champ_val = Objective.value_from(champion_report, kind)
        rec.objective_kind = kind
        rec.objective_value = cand_val
        if Objective.improved(kind, cand_val, champ_val, self.config.epsilon):
            rec.decision = Decision.ACCEPTED
            rec.notes = f"champion replaced: {kind} {champ_val:g} -> {cand_val:g}"
            self.champion = ChampionState(
                variant=variant, build=build, report=report, records=list(records)
            )
            save_records_jsonl(self._records_path(self.champion), records)
        else:
            rec.decision = Decision.REJECTED_REGRESSION
            rec.notes = f"no improvement: {kind} {cand_val:g} vs champion {champ_val:g}"
        rec.champion_objective = Objective.value_from(self.champion.report, kind)
        rec.champion_par2 = self.champion.report.par2_overall

        doc = craft_feedback([s1, s2], build)
        self._write_feedback(cycle, doc.markdown)
        self._lineage(variant, rec)
        return finish()

    def _lineage(self, variant: SolverVariant, rec: CycleRecord) -> None:
        changes = rec.intent or (rec.plan.splitlines()[0] if rec.plan else "(no intent)")
        if rec.report is not None:
            r = rec.report
            conclusions = (
                f"decision: {rec.decision.value}. solved {r.solved}/{r.suite_size}"
                f" (sat {r.solved_sat}, unsat {r.solved_unsat}),"
                f" PAR-2 overall {r.par2_overall:.3f}"
                f" sat {_opt(r.par2_sat)} unsat {_opt(r.par2_unsat)}."
            )
        else:
            conclusions = f"decision: {rec.decision.value}. {rec.notes}"
        record_lineage(variant, f"Cycle {rec.cycle}", changes, conclusions)

    # -- whole runs --------------------------------------------------------

    def run(self, n_cycles: int) -> EvolutionResult:
        seed_rec = self.seed()
        records: List[CycleRecord] = []
        for _ in range(n_cycles):
            try:
                records.append(self.run_cycle())
            except ReplayExhausted:
                log.info("scripted backend exhausted; stopping after %d cycles", len(records))
                break
        assert self.champion is not None
        return EvolutionResult(
            work_dir=self.work,
            seed_record=seed_rec,
            records=records,
            champion=self.champion,
            trajectory_path=self.trajectory_path,
        )

    def resume(self, n_cycles: int) -> EvolutionResult:
        self.load_state()
        records: List[CycleRecord] = []
        for _ in range(n_cycles):
            try:
                records.append(self.run_cycle())
            except ReplayExhausted:
                break
        assert self.champion is not None
        seed_rec = self._load_record(0)
        return EvolutionResult(
            work_dir=self.work,
            seed_record=seed_rec,
            records=records,
            champion=self.champion,
            trajectory_path=self.trajectory_path,
        )

    def _load_record(self, cycle: int) -> CycleRecord:
        data = json.loads((self._cycle_dir(cycle) / "record.json").read_text())
        return CycleRecord(
            cycle=data["cycle"],
            variant_id=data["variant_id"],
            decision=Decision(data["decision"]),
            objective_kind=data["objective_kind"],
            objective_value=data["objective_value"],
            champion_objective=data["champion_objective"],
            champion_par2=data["champion_par2"],
            patch_digest=data["patch_digest"],
            notes=data["notes"],
        )


def _opt(value: Optional[float]) -> str:
    return "absent" if value is None else f"{value:.3f}"


def _added_lines(champion_root: Path, patchset: AgentPatchSet) -> Tuple[str, ...]:
    """Lines the patch set introduces, for crash post-mortems."""
    added: List[str] = []
    for rel, content in patchset.edits:
        old_path = champion_root / rel
        old = old_path.read_text(encoding="utf-8") if old_path.is_file() else ""
        diff = difflib.unified_diff(
            old.splitlines(), content.splitlines(), lineterm="", n=0
        )
        for line in diff:
            if line.startswith("+") and not line.startswith("+++"):
                text = line[1:].strip()
                if text:
                    added.append(text)
            if len(added) >= _ADDED_LINES_CAP:
                return tuple(added)
    return tuple(added)


def run_evolution(
    config: EvolutionConfig,
    n_cycles: int,
    backend=None,
    resume: bool = False,
) -> EvolutionResult:
    evo = Evolution(config, backend=backend)
    if resume:
        return evo.resume(n_cycles)
    return evo.run(n_cycles)
