"""Command-line front end.

One binary, subcommand style. Results go to stdout, diagnostics to stderr.
Exit codes: 0 success / compliant / valid, 1 findings / invalid / failures,
2 usage or environment errors. Every pipeline stage is reachable on its
own, and `evolve run` drives the whole loop from a config file. Passing
`--json` switches any subcommand to a stable machine-readable schema.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path
from types import SimpleNamespace
from typing import Optional

from . import demo as demo_mod
from .drat import ProofError, check_proof_file
from .evolution import EvolutionConfig, EvolutionError, SeedRejected, run_evolution
from .formula import (
    Assignment,
    FormulaError,
    check_model,
    parse_dimacs_file,
)
from .gates import (
    DEFAULT_STAGE1_LIMITS,
    DEFAULT_STAGE2_LIMITS,
    load_suite,
    stage1_smoke,
    stage2_validate,
)
from .metrics import (
    MetricsError,
    VbsTable,
    build_report,
    cactus_points,
    par2,
)
from .gates import GateError
from .rules import (
    RuleError,
    analyze_failures,
    compliance_check,
    evolve_rules,
    load_rules,
    write_precommit_hook,
    write_seed_rules,
)
from .runner import (
    ResourceLimits,
    load_records_jsonl,
    run_benchmark,
    save_records_jsonl,
)
from .suites import (
    SuiteError,
    generate_smoke_suite,
    generate_validation_suite,
)
from .workspace import WorkspaceError, validate_layout


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _emit(args: argparse.Namespace, payload: dict, text: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True))
    elif text:
        print(text)


def _variant_for(path: str, *, need_binary: bool) -> tuple[Optional[object], str]:
    report = validate_layout(Path(path))
    if not report.ok:
        return None, "; ".join(report.violations)
    variant = report.variant
    if need_binary and not variant.binary.is_file():
        return None, f"no built binary at {variant.binary}; run the build first"
    return variant, ""


# ---------------------------------------------------------------- check-model


def _cmd_check_model(args: argparse.Namespace) -> int:
    formula = parse_dimacs_file(args.cnf)
    text = Path(args.model).read_text()
    lits: list[int] = []
    saw_vline = any(ln.lstrip().startswith("v") for ln in text.splitlines())
    for line in text.splitlines():
        line = line.strip()
        if saw_vline and not line.startswith("v"):
            continue
        for tok in line.lstrip("v").split():
            try:
                lit = int(tok)
            except ValueError:
                continue
            if lit != 0:
                lits.append(lit)
    model = Assignment.from_literals(lits, num_vars=formula.num_vars)
    result = check_model(formula, model)
    payload = {
        "command": "check-model",
        "satisfied": result.satisfied,
        "failing_clause": result.failing_clause,
        "defaulted_vars": list(result.defaulted_vars),
    }
    if result.satisfied:
        _emit(args, payload, "MODEL OK")
        return 0
    _emit(args, payload, f"MODEL BAD: clause {result.failing_clause} falsified")
    return 1


# ---------------------------------------------------------------- check-proof


def _cmd_check_proof(args: argparse.Namespace) -> int:
    formula = parse_dimacs_file(args.cnf)
    try:
        verdict = check_proof_file(formula, args.drat)
    except ProofError as exc:
        _emit(
            args,
            {"command": "check-proof", "valid": False, "reason": f"malformed proof: {exc}"},
            f"INVALID: malformed proof: {exc}",
        )
        return 1
    payload = {
        "command": "check-proof",
        "valid": verdict.valid,
        "failed_lemma": verdict.failed_lemma,
        "reason": verdict.reason,
        "lemmas_checked": verdict.lemmas_checked,
    }
    if verdict.valid:
        _emit(args, payload, f"VALID ({verdict.lemmas_checked} lemmas checked)")
        return 0
    _emit(args, payload, f"INVALID: lemma {verdict.failed_lemma}: {verdict.reason}")
    return 1


# ------------------------------------------------------------- smoke/validate


def _gate_common(args: argparse.Namespace, stage: int) -> int:
    variant, problem = _variant_for(args.variant, need_binary=True)
    if variant is None:
        _err(problem)
        return 2
    suite = load_suite(args.suite)
    defaults = DEFAULT_STAGE1_LIMITS if stage == 1 else DEFAULT_STAGE2_LIMITS
    limits = ResourceLimits(
        wall_timeout=args.timeout if args.timeout else defaults.wall_timeout
    )
    with tempfile.TemporaryDirectory(prefix="satevo_gate_") as td:
        if stage == 1:
            verdict = stage1_smoke(
                variant, suite, limits, parallelism=args.parallelism, workdir=Path(td)
            )
        else:
            verdict = stage2_validate(
                variant,
                suite,
                limits,
                parallelism=args.parallelism,
                workdir=Path(td),
                proof_check_fraction=args.proof_fraction,
            )
    payload = {"command": f"stage{stage}", **verdict.to_json_dict()}
    lines = [f"{f.instance}: {f.kind}: {f.detail}" for f in verdict.failures]
    status = "PASS" if verdict.passed else f"FAIL ({len(verdict.failures)} failure(s))"
    _emit(args, payload, "\n".join(lines + [f"{status}: {verdict.checked} instance(s) checked"]))
    return 0 if verdict.passed else 1


def _cmd_smoke(args: argparse.Namespace) -> int:
    return _gate_common(args, 1)


def _cmd_validate(args: argparse.Namespace) -> int:
    return _gate_common(args, 2)


# ----------------------------------------------------------------------- bench


def _cmd_bench(args: argparse.Namespace) -> int:
    variant, problem = _variant_for(args.variant, need_binary=True)
    if variant is None:
        _err(problem)
        return 2
    instances = sorted(Path(args.suite).glob("*.cnf"))
    if not instances:
        _err(f"no .cnf instances under {args.suite}")
        return 2
    limits = ResourceLimits(wall_timeout=args.timeout)
    with tempfile.TemporaryDirectory(prefix="satevo_bench_") as td:
        records = run_benchmark(
            variant.run_script,
            instances,
            limits,
            parallelism=args.parallelism,
            workdir=Path(td),
            time_source=args.time_source,
            cost_scale=args.cost_scale,
        )
    if args.out:
        save_records_jsonl(args.out, records)
        print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
    solved = sum(1 for r in records if r.solved)
    payload = {
        "command": "bench",
        "suite_size": len(records),
        "solved": solved,
        "records": [r.to_json_dict() for r in records],
    }
    lines = [
        f"{r.instance}: {r.outcome.value} {r.wall_time:.3f}s"
        + (f" cost={r.cost}" if r.cost is not None else "")
        for r in records
    ]
    _emit(args, payload, "\n".join(lines + [f"solved {solved}/{len(records)}"]))
    return 0


# ----------------------------------------------------------------------- score


def _cmd_score(args: argparse.Namespace) -> int:
    records = load_records_jsonl(args.records)
    if args.vbs:
        vbs = VbsTable.load(args.vbs)
        report = build_report(records, vbs, timeout=args.timeout, par_factor=args.par_factor)
        payload = {"command": "score", **report.to_json_dict()}
        _emit(args, payload, report.to_text())
        return 0
    value = par2(records, timeout=args.timeout, factor=args.par_factor)
    _emit(args, {"command": "score", "par2_overall": value}, str(value))
    return 0


# ----------------------------------------------------------------------- rules


def _cmd_rules_check(args: argparse.Namespace) -> int:
    variant, problem = _variant_for(args.variant, need_binary=False)
    if variant is None:
        _err(problem)
        return 2
    rules = load_rules(Path(args.rules))
    report = compliance_check(variant, rules)
    payload = {
        "command": "rules-check",
        "variant": report.variant_id,
        "compliant": report.compliant,
        "findings": [
            {
                "kind": f.kind,
                "path": f.path,
                "line": f.line,
                "detail": f.detail,
                "pattern": f.pattern,
            }
            for f in report.findings
        ],
    }
    _emit(args, payload, report.to_markdown())
    return 0 if report.compliant else 1


def _shim_record(data: dict) -> SimpleNamespace:
    """Rebuild just enough of a cycle record for failure analysis."""
    build = None
    if data.get("build"):
        build = SimpleNamespace(
            success=data["build"].get("success", False),
            diagnostics=data["build"].get("diagnostics", ""),
        )
    verdicts = [
        SimpleNamespace(
            stage=v.get("stage", "?"),
            failures=[
                SimpleNamespace(
                    kind=f.get("kind", "?"),
                    instance=f.get("instance", "?"),
                    detail=f.get("detail", ""),
                )
                for f in v.get("failures", ())
            ],
        )
        for v in data.get("gate_failures", ())
    ]
    compliance = None
    if data.get("compliance_findings"):
        compliance = SimpleNamespace(
            findings=[
                SimpleNamespace(
                    kind=f.get("kind", "?"),
                    detail=f.get("detail", ""),
                )
                for f in data["compliance_findings"]
            ]
        )
    return SimpleNamespace(
        cycle_id=data.get("variant_id", str(data.get("cycle", "?"))),
        build=build,
        verdicts=verdicts,
        compliance=compliance,
        decision=data.get("decision", ""),
        added_lines=tuple(data.get("added_lines", ())),
        objective_note=data.get("notes", ""),
    )


def _cmd_rules_evolve(args: argparse.Namespace) -> int:
    rules_dir = Path(args.rules)
    if not rules_dir.is_dir():
        _err(f"rules directory missing: {rules_dir}")
        return 2
    record_files = sorted(Path(args.run_dir).glob("cycles/*/record.json"))
    if not record_files:
        _err(f"no cycle records under {args.run_dir}")
        return 2
    history = [_shim_record(json.loads(p.read_text())) for p in record_files]
    signatures = analyze_failures(history)
    ruleset = load_rules(rules_dir)
    patches, _updated, snap = evolve_rules(ruleset, signatures)
    payload = {
        "command": "rules-evolve",
        "signatures": len(signatures),
        "patches": [p.to_json_dict() for p in patches],
        "snapshot": snap,
    }
    lines = [f"{p.op} -> rule {p.target}" for p in patches]
    lines.append(f"{len(signatures)} signature(s), {len(patches)} patch(es) applied")
    if snap:
        lines.append(f"snapshot {snap}")
    _emit(args, payload, "\n".join(lines))
    return 0


def _cmd_rules_seed(args: argparse.Namespace) -> int:
    root = write_seed_rules(Path(args.rules), overwrite=args.force)
    names = sorted(p.name for p in root.glob("0*.md"))
    _emit(args, {"command": "rules-seed", "written": names}, "\n".join(names))
    return 0


def _cmd_rules_hook(args: argparse.Namespace) -> int:
    path = write_precommit_hook(Path(args.dest), Path(args.rules), Path(args.variant))
    _emit(args, {"command": "rules-hook", "path": str(path)}, str(path))
    return 0


# ---------------------------------------------------------------------- evolve


def _cmd_evolve_run(args: argparse.Namespace) -> int:
    config = EvolutionConfig.from_json(args.config)
    try:
        result = run_evolution(config, args.cycles, resume=args.resume)
    except SeedRejected as exc:
        _err(f"seed variant rejected: {exc}")
        return 1
    champion = result.champion
    payload = {
        "command": "evolve-run",
        "work_dir": str(result.work_dir),
        "champion": champion.variant.id,
        "champion_objective": result.records[-1].champion_objective
        if result.records
        else result.seed_record.champion_objective,
        "accepted": [r.variant_id for r in result.accepted],
        "cycles": len(result.records),
        "trajectory": str(result.trajectory_path),
    }
    text = (
        Path(result.trajectory_path).read_text().rstrip("\n")
        + f"\nchampion: {champion.variant.id}"
    )
    _emit(args, payload, text)
    return 0


# ---------------------------------------------------------------------- report


def _cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    trajectory = run_dir / "trajectory.csv"
    if not trajectory.is_file():
        _err(f"no trajectory.csv under {run_dir}")
        return 2
    text = trajectory.read_text().rstrip("\n")
    payload: dict = {"command": "report", "trajectory": text.splitlines()}
    if args.cactus:
        latest = None
        for rec_path in sorted(run_dir.glob("cycles/*/records.jsonl")):
            latest = rec_path
        if latest is None:
            _err("no benchmark records recorded; cannot emit cactus data")
            return 2
        points = cactus_points(load_records_jsonl(latest))
        out = Path(args.cactus)
        out.write_text(
            "wall_time,solved\n"
            + "".join(f"{t:.6f},{n}\n" for t, n in points)
        )
        payload["cactus"] = str(out)
        payload["cactus_points"] = len(points)
        print(f"wrote {len(points)} cactus points to {out}", file=sys.stderr)
    _emit(args, payload, text)
    return 0


# ------------------------------------------------------------------ gen-suite


def _cmd_gen_suite(args: argparse.Namespace) -> int:
    out = Path(args.out)
    if args.kind == "smoke":
        generate_smoke_suite(out, count=args.count or 115)
    else:
        generate_validation_suite(out, count=args.count or 50)
    n = len(sorted(out.glob("*.cnf")))
    payload = {
        "command": "gen-suite",
        "kind": args.kind,
        "out": str(out),
        "instances": n,
    }
    _emit(args, payload, f"{n} instances under {out}")
    return 0


# ----------------------------------------------------------------------- demo


def _cmd_demo(args: argparse.Namespace) -> int:
    paths = demo_mod.build_scenario(args.dest)
    payload = {
        "command": "demo",
        "root": str(paths.root),
        "config": str(paths.config_file),
    }
    _emit(
        args,
        payload,
        f"scenario ready under {paths.root}\n"
        f"run it with: satevo evolve run {paths.config_file} --cycles 10",
    )
    return 0


# --------------------------------------------------------------------- parser


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satevo",
        description="SAT solver evolution harness: gates, benchmarks, rules, loop.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_json(p: argparse.ArgumentParser) -> None:
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("check-model", help="verify a claimed satisfying assignment")
    p.add_argument("cnf")
    p.add_argument("model", help="file with v-lines or bare literals")
    add_json(p)
    p.set_defaults(func=_cmd_check_model)

    p = sub.add_parser("check-proof", help="verify a DRAT refutation")
    p.add_argument("cnf")
    p.add_argument("drat")
    add_json(p)
    p.set_defaults(func=_cmd_check_proof)

    for name, help_text in (
        ("smoke", "stage 1: fast sweep for crashes and wrong answers"),
        ("validate", "stage 2: models re-checked, proofs re-verified"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("variant", help="variant directory (built)")
        p.add_argument("--suite", required=True, help="suite directory with truth table")
        p.add_argument("--timeout", type=float, default=0.0, help="per-instance wall limit")
        p.add_argument("--parallelism", type=int, default=4)
        if name == "validate":
            p.add_argument(
                "--proof-fraction",
                type=float,
                default=1.0,
                help="fraction of UNSAT claims whose proofs are re-checked",
            )
        add_json(p)
        p.set_defaults(func=_cmd_smoke if name == "smoke" else _cmd_validate)

    p = sub.add_parser("bench", help="run a variant over a benchmark directory")
    p.add_argument("variant")
    p.add_argument("suite")
    p.add_argument("--timeout", type=float, default=5000.0)
    p.add_argument("--parallelism", type=int, default=4)
    p.add_argument("--out", help="write records JSONL here")
    p.add_argument("--time-source", choices=("wall", "reported"), default="wall")
    p.add_argument("--cost-scale", type=float, default=1000.0)
    add_json(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("score", help="PAR scoring over recorded runs")
    p.add_argument("records", help="records JSONL from bench")
    p.add_argument("--par-factor", type=float, default=2.0)
    p.add_argument("--timeout", type=float, default=5000.0)
    p.add_argument("--vbs", help="VBS table; enables the full report")
    add_json(p)
    p.set_defaults(func=_cmd_score)

    rules = sub.add_parser("rules", help="rulebase operations")
    rsub = rules.add_subparsers(dest="rules_command", required=True)

    p = rsub.add_parser("check", help="compliance scan of a variant")
    p.add_argument("variant")
    p.add_argument("--rules", required=True, help="rules directory")
    add_json(p)
    p.set_defaults(func=_cmd_rules_check)

    p = rsub.add_parser("evolve", help="grow the rulebase from recorded cycles")
    p.add_argument("run_dir", help="evolution work dir holding cycles/*/record.json")
    p.add_argument("--rules", required=True)
    add_json(p)
    p.set_defaults(func=_cmd_rules_evolve)

    p = rsub.add_parser("seed", help="write the initial rule files")
    p.add_argument("rules", help="destination directory")
    p.add_argument("--force", action="store_true", help="overwrite existing files")
    add_json(p)
    p.set_defaults(func=_cmd_rules_seed)

    p = rsub.add_parser("hook", help="write a pre-commit compliance hook")
    p.add_argument("dest", help="hook path to write")
    p.add_argument("--rules", required=True)
    p.add_argument("--variant", required=True)
    add_json(p)
    p.set_defaults(func=_cmd_rules_hook)

    evolve = sub.add_parser("evolve", help="champion/challenger loop")
    esub = evolve.add_subparsers(dest="evolve_command", required=True)
    p = esub.add_parser("run", help="run cycles from a config file")
    p.add_argument("config")
    p.add_argument("--cycles", type=int, default=10)
    p.add_argument("--resume", action="store_true", help="continue a stored run")
    add_json(p)
    p.set_defaults(func=_cmd_evolve_run)

    p = sub.add_parser("report", help="summarize a run; optionally emit cactus CSV")
    p.add_argument("run_dir")
    p.add_argument("--cactus", help="write wall_time,solved points to this CSV")
    add_json(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("gen-suite", help="generate a suite with its truth table")
    p.add_argument("kind", choices=("smoke", "validation"))
    p.add_argument("out")
    p.add_argument("--count", type=int, default=0, help="instance count (0 = default)")
    add_json(p)
    p.set_defaults(func=_cmd_gen_suite)

    p = sub.add_parser("demo", help="build the self-contained demonstration scenario")
    p.add_argument("dest")
    add_json(p)
    p.set_defaults(func=_cmd_demo)

    return parser


_EXPECTED_ERRORS = (
    FormulaError,
    ProofError,
    MetricsError,
    RuleError,
    GateError,
    SuiteError,
    WorkspaceError,
    EvolutionError,
    demo_mod.ScenarioError,
    FileNotFoundError,
    NotADirectoryError,
    IsADirectoryError,
    PermissionError,
    ValueError,
)


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _EXPECTED_ERRORS as exc:
        _err(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
