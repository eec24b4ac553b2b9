"""Static rulebase, compliance scanning, and rule evolution.

The rulebase is six markdown files (00..05) that travel with an evolution
run. They are read by the agent as guidance and by this module as data:
rule 04 carries machine-checkable fenced ``forbidden`` blocks that the
compliance scanner applies to every C/C++ source in a variant.

After each cycle a post-mortem turns recorded failures into
FailureSignatures, and a fixed signature-kind -> patch-op table appends
concrete rule updates (new forbidden blocks, tightened pre-evaluation
steps, logging demands). Every patch batch snapshots the prior rule set
under a content-addressed id, so any historical rule state can be restored
and the patch log replayed byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .workspace import MANDATORY_DOCS, RUN_SCRIPT, SolverVariant

log = logging.getLogger(__name__)

RULE_FILENAMES = (
    "00_rule_compliance_verification.md",
    "01_pre_evaluation_testing.md",
    "02_critical_correctness.md",
    "03_mandatory_logging.md",
    "04_forbidden_patterns.md",
    "05_automatic_rule_evolution.md",
)

SOURCE_SUFFIXES = (".c", ".h", ".cc", ".cpp", ".hpp", ".cxx")

SNAPSHOT_DIRNAME = "_snapshots"
PATCH_LOG = "_patches.jsonl"

_VERSION_RE = re.compile(r"<!-- rule-version: (\d+) -->")
_BLOCK_RE = re.compile(r"```forbidden\n(.*?)```", re.DOTALL)

SIGNATURE_KINDS = (
    "CompileError",
    "VerifierMismatch",
    "MissingDocs",
    "PredictiveTermination",
    "CrashPattern",
    "Regression",
)

# signature kind -> (patch op, target rule id)
KIND_TO_OP = {
    "CompileError": ("TightenPreEval", "01"),
    "VerifierMismatch": ("TightenPreEval", "01"),
    "MissingDocs": ("StrengthenLogging", "03"),
    "PredictiveTermination": ("FreeformAppend", "02"),
    "CrashPattern": ("AppendForbidden", "04"),
    "Regression": ("FreeformAppend", "05"),
}


class RuleError(Exception):
    pass


class MissingRuleFile(RuleError):
    pass


class MalformedForbiddenBlock(RuleError):
    pass


@dataclass(frozen=True)
class ForbiddenPattern:
    pattern: str
    rationale: str
    example: str = ""
    is_regex: bool = False

    def matcher(self):
        if self.is_regex:
            return re.compile(self.pattern)
        return None

    def hits(self, line: str) -> bool:
        if self.is_regex:
            return re.search(self.pattern, line) is not None
        return self.pattern in line


@dataclass(frozen=True)
class RuleFile:
    id: str
    name: str
    body: str
    version: int
    forbidden: Tuple[ForbiddenPattern, ...] = ()


@dataclass
class RuleSet:
    root: Path
    files: Dict[str, RuleFile]

    def versions(self) -> Dict[str, int]:
        return {rid: rf.version for rid, rf in sorted(self.files.items())}

    def forbidden_patterns(self) -> Tuple[ForbiddenPattern, ...]:
        out: List[ForbiddenPattern] = []
        for rid in sorted(self.files):
            out.extend(self.files[rid].forbidden)
        return tuple(out)

    def summary(self) -> str:
        lines = []
        for rid in sorted(self.files):
            rf = self.files[rid]
            lines.append(f"rule {rid} ({rf.name}) v{rf.version}")
        return "\n".join(lines)


@dataclass(frozen=True)
class FailureSignature:
    kind: str
    evidence: str
    cycle: str
    snippet: str = ""

    def __post_init__(self) -> None:
        if self.kind not in SIGNATURE_KINDS:
            raise ValueError(f"unknown signature kind: {self.kind}")
        if not self.evidence.strip():
            raise ValueError("signature evidence must be non-empty")

    @property
    def normalized(self) -> Tuple[str, str]:
        return (self.kind, " ".join(self.evidence.split()))

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "evidence": self.evidence,
            "cycle": self.cycle,
            "snippet": self.snippet,
        }


@dataclass(frozen=True)
class RulePatch:
    target: str
    op: str
    payload: str
    provenance: FailureSignature

    def to_json_dict(self) -> dict:
        return {
            "target": self.target,
            "op": self.op,
            "payload": self.payload,
            "provenance": self.provenance.to_json_dict(),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "RulePatch":
        return RulePatch(
            target=d["target"],
            op=d["op"],
            payload=d["payload"],
            provenance=FailureSignature(**d["provenance"]),
        )


@dataclass(frozen=True)
class ComplianceFinding:
    kind: str  # missing-docs | packaging | forbidden-pattern
    path: str
    line: int
    detail: str
    pattern: str = ""


@dataclass(frozen=True)
class ComplianceReport:
    variant_id: str
    findings: Tuple[ComplianceFinding, ...]

    @property
    def compliant(self) -> bool:
        return not self.findings

    def to_markdown(self) -> str:
        if self.compliant:
            return f"Compliance check for {self.variant_id}: clean.\n"
        lines = [f"Compliance check for {self.variant_id}: {len(self.findings)} finding(s).", ""]
        for f in self.findings:
            loc = f"{f.path}:{f.line}" if f.line else f.path
            extra = f" [pattern: {f.pattern}]" if f.pattern else ""
            lines.append(f"- {f.kind} at {loc}: {f.detail}{extra}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Seed rulebase


def _seed(body: str) -> str:
    header = "<!-- rule-version: 1 -->\n<!-- seed: authored initial rulebase -->\n"
    return header + body.lstrip("\n")


SEED_RULES: Dict[str, str] = {
    "00_rule_compliance_verification.md": _seed("""
# Rule 00: compliance verification

The goal of this repository is the repository-scale self-evolution of a SAT
solver: each cycle an agent proposes and implements source changes, and the
harness decides whether the challenger replaces the champion. Performance
matters only after correctness and compliance are beyond doubt.

Before any candidate is evaluated, a compliance pass must confirm:

- the variant directory matches the mandatory layout (bin/, src/, build/,
  CHANGELOG.md, HYPOTHESIS.md, RESULTS.md, starexec_build);
- all three markdown docs are present and non-empty;
- bin/starexec_run_default exists and is executable;
- no source file matches a forbidden pattern from rule 04.

Cite rule numbers when reporting violations ("rule 01 pre-evaluation
testing", "rule 03 mandatory logging", "rule 04 forbidden patterns").
Non-compliant candidates are rejected without being built or run.
"""),
    "01_pre_evaluation_testing.md": _seed("""
# Rule 01: pre-evaluation testing

No candidate reaches the benchmark sweep without passing, in order:

1. a clean build via `bash starexec_build` (exit 0, binary present);
2. the smoke suite: every instance answered, no crash, no answer
   contradicting recorded truth;
3. full validation: every satisfiable claim re-checked against the model,
   every unsatisfiable claim re-checked against the emitted proof file.

A failure at any step ends the cycle immediately; the failure detail is
returned to the agent verbatim. Do not weaken, skip, or reorder these
steps in pursuit of throughput.
"""),
    "02_critical_correctness.md": _seed("""
# Rule 02: critical correctness

1. Output only definitive answers: "s SATISFIABLE" with a complete model,
   or "s UNSATISFIABLE" with a machine-checkable clausal proof. Exit code
   10 for satisfiable, 20 for unsatisfiable, anything else for no claim.
2. Never guess. Predictive or heuristic-only termination that emits an
   answer the search has not established is a correctness violation, not
   an optimization.
3. No instance-specific shortcuts: the solver must not condition on
   instance names, hashes, or benchmark metadata.
4. Proof logging stays on for every unsatisfiable claim. A claim without a
   valid proof is treated as a wrong answer.
5. Soundness checks that exist in the code base must remain intact; edits
   that weaken assertions or proof obligations are rejected.
"""),
    "03_mandatory_logging.md": _seed("""
# Rule 03: mandatory logging

Every cycle must leave a written trace:

- HYPOTHESIS.md states the planned modification and why it should help
  before the change is evaluated.
- CHANGELOG.md records what was actually changed, appended per cycle.
- RESULTS.md records the evaluation conclusion (scores or the gate that
  rejected the candidate), appended per cycle.
- The solver prints a machine-readable effort line (`c cost <n>`) so runs
  can be compared under deterministic accounting; comment lines use the
  `c ` prefix.

Candidates with missing or empty docs are rejected before evaluation.
"""),
    "04_forbidden_patterns.md": _seed("""
# Rule 04: forbidden patterns

Source files (.c, .h, .cc, .cpp, .hpp, .cxx) are scanned line by line.
Any match rejects the candidate before it is built. Patterns are literal
substrings unless declared as `regex:`.

```forbidden
pattern: gets(
rationale: unbounded read into a caller buffer; memory-unsafe on any input
example: gets(line);
```

```forbidden
pattern: system(
rationale: shelling out hides work from the harness and breaks sandboxing
example: system("./preprocess");
```

```forbidden
pattern: pthread_create
rationale: solvers must stay single-threaded; worker threads skew timing comparisons
example: pthread_create(&tid, 0, worker, 0);
```

```forbidden
pattern: fork(
rationale: child processes dodge per-process resource accounting
example: if (fork() == 0) run_helper();
```

```forbidden
pattern: std::thread
rationale: the single-threaded requirement applies to C++ variants too
example: std::thread t(search);
```
"""),
    "05_automatic_rule_evolution.md": _seed("""
# Rule 05: automatic rule evolution

After every cycle a post-mortem classifies recorded failures into
signatures and turns them into rule patches:

| signature kind        | patch operation   | target rule |
|-----------------------|-------------------|-------------|
| CompileError          | TightenPreEval    | 01          |
| VerifierMismatch      | TightenPreEval    | 01          |
| MissingDocs           | StrengthenLogging | 03          |
| PredictiveTermination | FreeformAppend    | 02          |
| CrashPattern          | AppendForbidden   | 04          |
| Regression            | FreeformAppend    | 05          |

Each applied batch snapshots the prior rule set under a content-addressed
id and bumps the version header of every touched file. Patches carry the
captured evidence so later readers can judge whether the rule still earns
its keep. Regression lessons are appended below this line.
"""),
}


def write_seed_rules(root: Path, overwrite: bool = False) -> Path:
    """Materialize the seed rulebase into a directory."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for name in RULE_FILENAMES:
        dest = root / name
        if dest.exists() and not overwrite:
            continue
        dest.write_text(SEED_RULES[name], encoding="utf-8")
    return root


# --------------------------------------------------------------------------
# Parsing


def _parse_forbidden_blocks(name: str, body: str) -> Tuple[ForbiddenPattern, ...]:
    out: List[ForbiddenPattern] = []
    for m in _BLOCK_RE.finditer(body):
        fields: Dict[str, str] = {}
        for raw in m.group(1).splitlines():
            line = raw.strip()
            if not line:
                continue
            key, sep, value = line.partition(":")
            if not sep:
                raise MalformedForbiddenBlock(f"{name}: line without key: {line!r}")
            fields[key.strip()] = value.strip()
        has_lit = "pattern" in fields
        has_re = "regex" in fields
        if has_lit == has_re:
            raise MalformedForbiddenBlock(
                f"{name}: block needs exactly one of pattern:/regex:"
            )
        if not fields.get("rationale"):
            raise MalformedForbiddenBlock(f"{name}: block missing rationale")
        pattern = fields["regex"] if has_re else fields["pattern"]
        if not pattern:
            raise MalformedForbiddenBlock(f"{name}: empty pattern")
        if has_re:
            try:
                re.compile(pattern)
            except re.error as exc:
                raise MalformedForbiddenBlock(f"{name}: bad regex {pattern!r}: {exc}")
        out.append(
            ForbiddenPattern(
                pattern=pattern,
                rationale=fields["rationale"],
                example=fields.get("example", ""),
                is_regex=has_re,
            )
        )
    return tuple(out)


def _parse_rule_file(path: Path) -> RuleFile:
    body = path.read_text(encoding="utf-8")
    m = _VERSION_RE.search(body)
    version = int(m.group(1)) if m else 1
    if not m:
        log.debug("rule file %s has no version header, assuming 1", path.name)
    return RuleFile(
        id=path.name[:2],
        name=path.name,
        body=body,
        version=version,
        forbidden=_parse_forbidden_blocks(path.name, body),
    )


def load_rules(root: Path) -> RuleSet:
    root = Path(root)
    files: Dict[str, RuleFile] = {}
    for name in RULE_FILENAMES:
        path = root / name
        if not path.is_file():
            raise MissingRuleFile(str(path))
        rf = _parse_rule_file(path)
        files[rf.id] = rf
    return RuleSet(root=root, files=files)


# --------------------------------------------------------------------------
# Compliance


def compliance_check(variant: SolverVariant, rules: RuleSet) -> ComplianceReport:
    """Docs, packaging, and forbidden-pattern scan for one variant."""
    findings: List[ComplianceFinding] = []

    for name in MANDATORY_DOCS:
        p = variant.root / name
        if not p.is_file():
            findings.append(ComplianceFinding("missing-docs", name, 0, f"{name} is missing"))
        elif not p.read_text(encoding="utf-8", errors="replace").strip():
            findings.append(ComplianceFinding("missing-docs", name, 0, f"{name} is empty"))

    run_script = variant.root / "bin" / RUN_SCRIPT
    if not run_script.is_file():
        findings.append(
            ComplianceFinding("packaging", f"bin/{RUN_SCRIPT}", 0, "run script is missing")
        )

    patterns = rules.forbidden_patterns()
    src_root = variant.root / "src"
    hits: List[ComplianceFinding] = []
    if src_root.is_dir() and patterns:
        for path in sorted(src_root.rglob("*")):
            if not path.is_file() or path.suffix not in SOURCE_SUFFIXES:
                continue
            rel = str(path.relative_to(variant.root))
            text = path.read_text(encoding="utf-8", errors="replace")
            for lineno, line in enumerate(text.splitlines(), start=1):
                flagged = set()
                for pat in patterns:
                    # Report each offending (line, pattern) once even when
                    # several rule entries carry the same pattern text.
                    if pat.pattern in flagged or not pat.hits(line):
                        continue
                    flagged.add(pat.pattern)
                    hits.append(
                        ComplianceFinding(
                            kind="forbidden-pattern",
                            path=rel,
                            line=lineno,
                            detail=pat.rationale,
                            pattern=pat.pattern,
                        )
                    )
    findings.extend(sorted(hits, key=lambda f: (f.path, f.line, f.pattern)))
    return ComplianceReport(variant_id=variant.id, findings=tuple(findings))


# --------------------------------------------------------------------------
# Post-mortem analysis

_PREDICTION_THRESHOLD = 2


def analyze_failures(history: Sequence[object]) -> List[FailureSignature]:
    """Classify recorded cycle failures into deduplicated signatures.

    History items are cycle records; only a handful of attributes are read
    (missing ones are treated as absent): `cycle_id`, `build` (with
    .success/.diagnostics), `verdicts` (each with .failures carrying
    .kind/.instance/.detail), `compliance` (with .findings), `decision`,
    `added_lines`, `objective_note`.
    """
    out: List[FailureSignature] = []
    seen = set()

    def emit(sig: FailureSignature) -> None:
        key = sig.normalized
        if key not in seen:
            seen.add(key)
            out.append(sig)

    for rec in history:
        cycle = str(getattr(rec, "cycle_id", getattr(rec, "cycle", "?")))
        snippet = "\n".join(getattr(rec, "added_lines", ()) or ())

        build = getattr(rec, "build", None)
        if build is not None and not build.success:
            evidence = _first_error_line(build.diagnostics)
            emit(FailureSignature("CompileError", evidence, cycle))

        # One signature per failure mode per cycle, not per instance; a bad
        # edit typically fails half the suite the same way and the rulebase
        # should grow by one lesson, not by one entry per instance.
        crashes: list[tuple[str, str]] = []
        mismatches: dict[str, list[tuple[str, str]]] = {}
        for verdict in getattr(rec, "verdicts", ()) or ():
            for failure in verdict.failures:
                kind = str(failure.kind)
                entry = (failure.instance, str(failure.detail))
                if kind == "Crash":
                    crashes.append(entry)
                elif kind in ("WrongAnswer", "InvalidModel", "InvalidProof"):
                    mismatches.setdefault(kind, []).append(entry)
        if crashes:
            names = sorted({inst for inst, _ in crashes})
            evidence = (
                f"crash on {len(names)} instance(s)"
                f" (e.g. {', '.join(names[:3])}); {crashes[0][1]}"
            )
            emit(FailureSignature("CrashPattern", evidence, cycle, snippet=snippet))
        for kind in sorted(mismatches):
            entries = mismatches[kind]
            names = sorted({inst for inst, _ in entries})
            evidence = (
                f"{kind} on {len(names)} instance(s)"
                f" (e.g. {', '.join(names[:3])}); {entries[0][1]}"
            )
            emit(FailureSignature("VerifierMismatch", evidence, cycle))
        wrong = sorted({inst for inst, _ in mismatches.get("WrongAnswer", ())})
        if len(wrong) >= _PREDICTION_THRESHOLD:
            shown = ", ".join(wrong[:5])
            more = f" and {len(wrong) - 5} more" if len(wrong) > 5 else ""
            emit(
                FailureSignature(
                    "PredictiveTermination",
                    f"answers for {shown}{more} contradict recorded truth in one"
                    " sweep; answers look predicted rather than derived",
                    cycle,
                )
            )

        compliance = getattr(rec, "compliance", None)
        if compliance is not None:
            for finding in compliance.findings:
                if finding.kind == "missing-docs":
                    emit(FailureSignature("MissingDocs", finding.detail, cycle))

        if getattr(rec, "decision", "") == "RejectedRegression":
            note = getattr(rec, "objective_note", "") or "objective did not beat champion"
            emit(FailureSignature("Regression", note, cycle))

    return out


def _first_error_line(diagnostics: str) -> str:
    for line in diagnostics.splitlines():
        if "error" in line.lower():
            return line.strip()
    for line in diagnostics.splitlines():
        if line.strip():
            return line.strip()
    return "build failed with no diagnostics"


# --------------------------------------------------------------------------
# Evolution


def _bump_version(body: str) -> str:
    m = _VERSION_RE.search(body)
    if m:
        n = int(m.group(1)) + 1
        return body[: m.start()] + f"<!-- rule-version: {n} -->" + body[m.end():]
    return f"<!-- rule-version: 2 -->\n{body}"


def _append_section(body: str, payload: str) -> str:
    return body.rstrip("\n") + "\n\n" + payload.rstrip("\n") + "\n"


def _one_line(text: str) -> str:
    return " ".join(text.split())


def _forbidden_pattern_from_snippet(snippet: str) -> Optional[str]:
    lines = [ln.strip() for ln in snippet.splitlines() if ln.strip()]
    if not lines:
        return None
    return max(lines, key=len)


def build_patch(sig: FailureSignature) -> Optional[RulePatch]:
    """Deterministic signature -> patch mapping; None if nothing to write."""
    op, target = KIND_TO_OP[sig.kind]
    evidence = _one_line(sig.evidence)

    if sig.kind == "CrashPattern":
        pattern = _forbidden_pattern_from_snippet(sig.snippet)
        if pattern is None:
            payload = (
                f"### Crash post-mortem (cycle {sig.cycle})\n\n"
                f"A candidate crashed ({evidence}) but the offending edit could not\n"
                f"be isolated to a source line. Investigate before reusing the idea."
            )
            return RulePatch(target="04", op="FreeformAppend", payload=payload, provenance=sig)
        payload = (
            f"```forbidden\npattern: {pattern}\n"
            f"rationale: crashed a prior candidate (cycle {sig.cycle}: {evidence})\n"
            f"example: {pattern}\n```"
        )
        return RulePatch(target=target, op=op, payload=payload, provenance=sig)

    if op == "TightenPreEval":
        payload = (
            f"### Added pre-evaluation check (cycle {sig.cycle})\n\n"
            f"Observed failure:\n\n    {evidence}\n\n"
            f"Re-run this class of check on the smoke suite before every build is\n"
            f"declared eligible; a candidate reproducing it is rejected at stage 1."
        )
    elif op == "StrengthenLogging":
        payload = (
            f"### Logging reminder (cycle {sig.cycle})\n\n"
            f"Documentation check failed: {evidence}. Every cycle must update all\n"
            f"three docs before evaluation; empty files count as missing."
        )
    elif sig.kind == "PredictiveTermination":
        payload = (
            f"### Predictive termination ban reinforced (cycle {sig.cycle})\n\n"
            f"Evidence: {evidence}.\n"
            f"Any termination path that prints an answer without a completed search\n"
            f"or a propagation-derived conflict is a correctness violation."
        )
    else:  # Regression lesson on rule 05
        payload = (
            f"### Regression lesson (cycle {sig.cycle})\n\n"
            f"{evidence}. Keep the hypothesis but do not retry the same edit\n"
            f"without new reasoning; prefer measuring on the smoke suite first."
        )
    return RulePatch(target=target, op=op, payload=payload, provenance=sig)


def snapshot_rules(ruleset: RuleSet) -> str:
    """Copy the current rule files under a content-addressed snapshot id."""
    h = hashlib.sha256()
    for name in RULE_FILENAMES:
        h.update(name.encode())
        h.update(b"\0")
        h.update((ruleset.root / name).read_bytes())
        h.update(b"\0")
    snap_id = h.hexdigest()[:16]
    dest = ruleset.root / SNAPSHOT_DIRNAME / snap_id
    if not dest.exists():
        dest.mkdir(parents=True)
        for name in RULE_FILENAMES:
            shutil.copy2(ruleset.root / name, dest / name)
    return snap_id


def restore_snapshot(root: Path, snapshot_id: str) -> RuleSet:
    root = Path(root)
    src = root / SNAPSHOT_DIRNAME / snapshot_id
    if not src.is_dir():
        raise MissingRuleFile(f"no snapshot {snapshot_id} under {root}")
    for name in RULE_FILENAMES:
        shutil.copy2(src / name, root / name)
    return load_rules(root)


def apply_patches(root: Path, patches: Iterable[RulePatch]) -> RuleSet:
    """Apply patches in order (append payload, bump version). Deterministic."""
    root = Path(root)
    for patch in patches:
        name = RULE_FILENAMES[int(patch.target)]
        path = root / name
        body = path.read_text(encoding="utf-8")
        body = _bump_version(_append_section(body, patch.payload))
        path.write_text(body, encoding="utf-8")
    return load_rules(root)


def evolve_rules(
    ruleset: RuleSet,
    signatures: Sequence[FailureSignature],
) -> Tuple[List[RulePatch], RuleSet, Optional[str]]:
    """Turn signatures into applied patches; snapshot the prior rule set.

    Patches whose payload already appears in the target file are skipped,
    so a failure signature recurring across cycles does not pile up
    duplicate sections. Returns ([], ruleset, None) when nothing applies.
    """
    known_patterns = {fp.pattern for fp in ruleset.forbidden_patterns()}
    candidates: List[RulePatch] = []
    for sig in signatures:
        patch = build_patch(sig)
        if patch is None:
            continue
        name = RULE_FILENAMES[int(patch.target)]
        current = (ruleset.root / name).read_text(encoding="utf-8")
        if patch.payload in current:
            log.debug("skipping duplicate rule patch for %s", name)
            continue
        if patch.op == "AppendForbidden":
            m = re.search(r"^pattern: (.+)$", patch.payload, re.MULTILINE)
            if m and m.group(1) in known_patterns:
                log.debug("forbidden pattern already guarded: %s", m.group(1))
                continue
            if m:
                known_patterns.add(m.group(1))
        candidates.append(patch)

    if not candidates:
        return [], ruleset, None

    snap_id = snapshot_rules(ruleset)
    updated = apply_patches(ruleset.root, candidates)
    _log_patches(ruleset.root, snap_id, candidates)
    log.info(
        "rule evolution: %d patch(es), snapshot %s", len(candidates), snap_id
    )
    return candidates, updated, snap_id


def _log_patches(root: Path, snapshot_id: str, patches: Sequence[RulePatch]) -> None:
    entry = {
        "snapshot": snapshot_id,
        "patches": [p.to_json_dict() for p in patches],
    }
    with open(root / PATCH_LOG, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry, sort_keys=True) + "\n")


def load_patch_log(root: Path) -> List[Tuple[str, List[RulePatch]]]:
    path = Path(root) / PATCH_LOG
    if not path.is_file():
        return []
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        out.append((d["snapshot"], [RulePatch.from_json_dict(p) for p in d["patches"]]))
    return out


PRECOMMIT_HOOK = """#!/bin/sh
# Generated compliance hook: scan the variant tree before every commit.
set -e
satevo rules check --rules "{rules_dir}" "{variant_dir}"
"""


def write_precommit_hook(hook_path: Path, rules_dir: Path, variant_dir: Path) -> Path:
    hook_path = Path(hook_path)
    hook_path.parent.mkdir(parents=True, exist_ok=True)
    hook_path.write_text(
        PRECOMMIT_HOOK.format(rules_dir=rules_dir, variant_dir=variant_dir)
    )
    hook_path.chmod(0o755)
    return hook_path
