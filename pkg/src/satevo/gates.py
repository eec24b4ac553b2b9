"""Two-stage correctness gate and agent feedback.

Stage 1 is a fast smoke sweep over small instances with recorded truth:
crashes, contradicted answers, and malformed output end the cycle at once.
Stage 2 replays a validation suite and actually checks the artifacts:
every satisfiable claim is re-evaluated against its model and every
unsatisfiable claim against its emitted proof file. Only candidates that
survive both stages are worth benchmark time.

Verdicts are deterministic for a fixed variant and suite, except Timeout
entries, which are marked as such (wall-clock noise near the limit can flip
them).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .drat import ProofError, check_proof, parse_drat
from .formula import ClaimKind, check_model, parse_dimacs
from .runner import Outcome, ResourceLimits, RunRecord, run_benchmark
from .suites import TRUTH_FILENAME, SuiteMissing, load_truth_table
from .workspace import BuildResult, SolverVariant

log = logging.getLogger(__name__)

STAGE1 = "stage1"
STAGE2 = "stage2"

FAILURE_KINDS = (
    "Crash",
    "WrongAnswer",
    "InvalidModel",
    "InvalidProof",
    "Timeout",
    "OutputMalformed",
)

DEFAULT_STAGE1_LIMITS = ResourceLimits(wall_timeout=30.0)
DEFAULT_STAGE2_LIMITS = ResourceLimits(wall_timeout=300.0)


class GateError(Exception):
    pass


@dataclass(frozen=True)
class SmokeSuite:
    label: str
    root: Path
    instances: Tuple[Tuple[Path, ClaimKind], ...]

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def truth(self) -> Dict[str, ClaimKind]:
        return {path.name: kind for path, kind in self.instances}


def load_suite(root: str | Path, label: Optional[str] = None) -> SmokeSuite:
    """Read a suite directory: instances named by its truth table."""
    root = Path(root)
    table = load_truth_table(root / TRUTH_FILENAME)
    instances = []
    for name in sorted(table):
        path = root / name
        if not path.is_file():
            raise SuiteMissing(f"{root}: truth table names missing instance {name}")
        instances.append((path, table[name]))
    return SmokeSuite(label=label or root.name, root=root, instances=tuple(instances))


@dataclass(frozen=True)
class GateFailure:
    instance: str
    kind: str
    detail: str
    nondeterministic: bool = False

    def to_json_dict(self) -> dict:
        return {
            "instance": self.instance,
            "kind": self.kind,
            "detail": self.detail,
            "nondeterministic": self.nondeterministic,
        }


@dataclass(frozen=True)
class GateVerdict:
    stage: str
    failures: Tuple[GateFailure, ...]
    checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json_dict(self) -> dict:
        return {
            "stage": self.stage,
            "passed": self.passed,
            "checked": self.checked,
            "failures": [f.to_json_dict() for f in self.failures],
        }


def _common_failure(record: RunRecord, truth: ClaimKind) -> Optional[GateFailure]:
    """Failures any stage flags regardless of artifact checks."""
    if record.outcome == Outcome.CRASHED:
        sig = f"signal {record.signal}" if record.signal else "nonzero exit"
        detail = f"{sig}; {record.detail}" if record.detail else sig
        return GateFailure(record.instance, "Crash", detail)
    if record.outcome == Outcome.MEMOUT:
        return GateFailure(record.instance, "Crash", "memory limit exceeded")
    if record.outcome == Outcome.MALFORMED:
        return GateFailure(record.instance, "OutputMalformed", record.detail)
    if record.outcome == Outcome.TIMEOUT:
        return GateFailure(
            record.instance,
            "Timeout",
            f"no answer within {record.wall_time:.0f}s",
            nondeterministic=True,
        )
    if record.outcome == Outcome.SOLVED_SAT and truth == ClaimKind.UNSAT:
        return GateFailure(
            record.instance, "WrongAnswer", "claimed SAT, recorded truth is UNSAT"
        )
    if record.outcome == Outcome.SOLVED_UNSAT and truth == ClaimKind.SAT:
        return GateFailure(
            record.instance, "WrongAnswer", "claimed UNSAT, recorded truth is SAT"
        )
    return None


def stage1_smoke(
    variant: SolverVariant,
    suite: SmokeSuite,
    limits: Optional[ResourceLimits] = None,
    parallelism: int = 4,
    workdir: Optional[Path] = None,
) -> GateVerdict:
    """Fast sweep: crashes, wrong answers, malformed output, hangs."""
    limits = limits or DEFAULT_STAGE1_LIMITS
    records = run_benchmark(
        variant.run_script,
        [path for path, _ in suite.instances],
        limits,
        parallelism=parallelism,
        workdir=workdir,
    )
    truth = suite.truth
    failures = []
    for rec in records:
        failure = _common_failure(rec, truth[rec.instance])
        if failure is not None:
            failures.append(failure)
    failures.sort(key=lambda f: f.instance)
    verdict = GateVerdict(stage=STAGE1, failures=tuple(failures), checked=len(records))
    log.info(
        "stage1 %s on %s: %s", variant.id, suite.label,
        "passed" if verdict.passed else f"{len(failures)} failure(s)",
    )
    return verdict


def _proof_sample(names: Sequence[str], fraction: float) -> set:
    """Deterministic evenly-spaced subset of instance names."""
    if fraction >= 1.0:
        return set(names)
    if fraction <= 0.0:
        return set()
    picked = set()
    ordered = sorted(names)
    for i, name in enumerate(ordered):
        if math.floor((i + 1) * fraction) > math.floor(i * fraction):
            picked.add(name)
    return picked


def stage2_validate(
    variant: SolverVariant,
    suite: SmokeSuite,
    limits: Optional[ResourceLimits] = None,
    parallelism: int = 4,
    workdir: Optional[Path] = None,
    proof_check_fraction: float = 1.0,
) -> GateVerdict:
    """Full validation: models re-checked, proofs re-verified, truth enforced."""
    limits = limits or DEFAULT_STAGE2_LIMITS
    records = run_benchmark(
        variant.run_script,
        [path for path, _ in suite.instances],
        limits,
        parallelism=parallelism,
        workdir=workdir,
    )
    truth = suite.truth
    by_name = {path.name: path for path, _ in suite.instances}
    unsat_claims = [
        r.instance for r in records
        if r.outcome == Outcome.SOLVED_UNSAT and truth[r.instance] == ClaimKind.UNSAT
    ]
    proof_targets = _proof_sample(unsat_claims, proof_check_fraction)

    failures = []
    for rec in records:
        kind = truth[rec.instance]
        failure = _common_failure(rec, kind)
        if failure is not None:
            failures.append(failure)
            continue
        if rec.outcome == Outcome.SOLVED_SAT:
            formula = parse_dimacs(by_name[rec.instance].read_text())
            model = rec.claim.model if rec.claim else None
            if model is None:
                failures.append(
                    GateFailure(rec.instance, "InvalidModel", "SAT claim carried no model")
                )
                continue
            check = check_model(formula, model)
            if not check.satisfied:
                failures.append(
                    GateFailure(
                        rec.instance,
                        "InvalidModel",
                        f"model violates clause {check.failing_clause}",
                    )
                )
        elif rec.outcome == Outcome.SOLVED_UNSAT and rec.instance in proof_targets:
            failure = _validate_proof(by_name[rec.instance], rec)
            if failure is not None:
                failures.append(failure)
    failures.sort(key=lambda f: f.instance)
    verdict = GateVerdict(stage=STAGE2, failures=tuple(failures), checked=len(records))
    log.info(
        "stage2 %s on %s: %s (%d proofs verified)",
        variant.id, suite.label,
        "passed" if verdict.passed else f"{len(failures)} failure(s)",
        len(proof_targets),
    )
    return verdict


def _validate_proof(instance_path: Path, record: RunRecord) -> Optional[GateFailure]:
    proof_path = record.proof_path
    if not proof_path or not Path(proof_path).is_file():
        return GateFailure(
            record.instance, "InvalidProof", "UNSAT claim but no proof file was written"
        )
    formula = parse_dimacs(instance_path.read_text())
    try:
        proof = parse_drat(Path(proof_path).read_text())
    except ProofError as exc:
        return GateFailure(record.instance, "InvalidProof", f"unparseable proof: {exc}")
    verdict = check_proof(formula, proof)
    if not verdict.valid:
        where = (
            f"lemma {verdict.failed_lemma}" if verdict.failed_lemma else "no refutation"
        )
        return GateFailure(
            record.instance, "InvalidProof", f"proof rejected at {where}: {verdict.reason}"
        )
    return None


# --------------------------------------------------------------------------
# Feedback


@dataclass(frozen=True)
class FeedbackDocument:
    markdown: str
    record: dict

    @property
    def eligible(self) -> bool:
        return bool(self.record.get("eligible"))


def craft_feedback(
    verdicts: Sequence[GateVerdict],
    build: Optional[BuildResult] = None,
    layout_violations: Sequence[str] = (),
    compliance_markdown: str = "",
) -> FeedbackDocument:
    """Fixed-template report handed back to the agent after a cycle.

    Stage sections appear in pipeline order regardless of input order, and
    build diagnostics are included verbatim: the agent sees exactly what the
    compiler said.
    """
    ordered = sorted(verdicts, key=lambda v: v.stage)
    lines: List[str] = ["# Verification feedback", ""]
    eligible = True

    if layout_violations:
        eligible = False
        lines.append("## Layout")
        lines.append("")
        for v in layout_violations:
            lines.append(f"- {v}")
        lines.append("")

    if compliance_markdown:
        eligible = False
        lines.append("## Compliance")
        lines.append("")
        lines.append(compliance_markdown.rstrip())
        lines.append("")

    if build is not None:
        lines.append("## Build")
        lines.append("")
        lines.append(f"status: {'success' if build.success else 'failure'}"
                     f" ({build.duration:.1f}s)")
        if not build.success:
            eligible = False
        if build.diagnostics.strip():
            lines.append("")
            lines.append("```")
            lines.append(build.diagnostics.rstrip())
            lines.append("```")
        lines.append("")

    stage_titles = {STAGE1: "Stage 1 (smoke suite)", STAGE2: "Stage 2 (validation)"}
    for verdict in ordered:
        lines.append(f"## {stage_titles.get(verdict.stage, verdict.stage)}")
        lines.append("")
        if verdict.passed:
            lines.append(f"passed ({verdict.checked} instances)")
        else:
            eligible = False
            lines.append(f"{len(verdict.failures)} failure(s) of {verdict.checked} instances:")
            lines.append("")
            for f in verdict.failures:
                nd = " (timing-sensitive)" if f.nondeterministic else ""
                lines.append(f"- {f.instance}: {f.kind}{nd}: {f.detail}")
        lines.append("")

    lines.append("## Conclusion")
    lines.append("")
    if eligible:
        lines.append("All gates passed; the candidate is eligible for performance evaluation.")
    else:
        lines.append("Fix the failures above; performance evaluation was not run.")
    markdown = "\n".join(lines) + "\n"

    record = {
        "eligible": eligible,
        "layout_violations": list(layout_violations),
        "build": build.to_json_dict() if build is not None else None,
        "stages": [v.to_json_dict() for v in ordered],
    }
    return FeedbackDocument(markdown=markdown, record=record)
