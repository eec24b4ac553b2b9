"""The bundled toy solver fixture and its seeded-bug mutants.

materialize_toy_solver() copies the vendored DPLL solver (a complete
variant tree: bin/, src/, build/, docs, starexec_build) into a working
directory. MUTANTS holds a corpus of deliberately broken versions, one per
failure class the verification gates must catch: crashes, wrong answers,
bogus models, bogus or missing proofs, malformed output, hangs, and a
build breakage. Each mutant is a list of exact-substring edits against the
pristine solver.c so the damage is reviewable and deterministic.
"""

from __future__ import annotations

import os
import re
import shutil
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, Tuple

FIXTURE_PACKAGE = "satevo"
FIXTURE_SUBDIR = "fixtures/toy_solver"

_BUDGET_RE = re.compile(r"#define DECISION_BUDGET \d+L?")


class FixtureError(Exception):
    pass


class UnknownMutant(FixtureError):
    pass


class PatternNotFound(FixtureError):
    pass


@dataclass(frozen=True)
class MutantSpec:
    """One seeded bug: a named, reviewable set of source edits."""

    name: str
    category: str
    summary: str
    edits: Tuple[Tuple[str, str], ...]


def materialize_toy_solver(dest: Path) -> Path:
    """Copy the vendored solver tree to dest and restore script exec bits."""
    dest = Path(dest)
    if dest.exists():
        raise FixtureError(f"destination already exists: {dest}")
    src = resources.files(FIXTURE_PACKAGE) / FIXTURE_SUBDIR
    with resources.as_file(src) as concrete:
        shutil.copytree(concrete, dest)
    for rel in ("starexec_build", "bin/starexec_run_default"):
        p = dest / rel
        if p.is_file():
            os.chmod(p, os.stat(p).st_mode | 0o755)
    return dest


def set_decision_budget_text(source: str, budget: int) -> str:
    """Rewrite the solver's decision budget constant in C source text."""
    new = f"#define DECISION_BUDGET {budget}L"
    text, n = _BUDGET_RE.subn(new, source)
    if n != 1:
        raise PatternNotFound(f"expected exactly one budget constant, found {n}")
    return text


def set_decision_budget(root: Path, budget: int) -> None:
    path = Path(root) / "src" / "solver.c"
    path.write_text(set_decision_budget_text(path.read_text(), budget))


def apply_edits(source: str, edits: Tuple[Tuple[str, str], ...]) -> str:
    """Apply exact-substring edits in order; each must match exactly once."""
    for find, replace in edits:
        n = source.count(find)
        if n != 1:
            raise PatternNotFound(
                f"edit pattern matched {n} times (need exactly 1): {find[:60]!r}"
            )
        source = source.replace(find, replace)
    return source


def mutant_source(pristine: str, name: str) -> str:
    try:
        spec = MUTANTS[name]
    except KeyError:
        raise UnknownMutant(name) from None
    return apply_edits(pristine, spec.edits)


def apply_mutant(root: Path, name: str) -> None:
    """Rewrite <root>/src/solver.c with the named seeded bug."""
    path = Path(root) / "src" / "solver.c"
    path.write_text(mutant_source(path.read_text(), name))


_CRASH_LINE = "{ volatile int *bad = 0; *bad = 1; }"

MUTANTS: Dict[str, MutantSpec] = {
    spec.name: spec
    for spec in [
        MutantSpec(
            name="crash_entry",
            category="crash",
            summary="null pointer write before parsing; dies on every instance",
            edits=(
                (
                    "    parse_dimacs(argv[1]);",
                    f"    {_CRASH_LINE}\n    parse_dimacs(argv[1]);",
                ),
            ),
        ),
        MutantSpec(
            name="crash_on_unsat",
            category="crash",
            summary="null pointer write instead of reporting unsatisfiable",
            edits=(
                (
                    '    emit_cost();\n    puts("s UNSATISFIABLE");\n    exit(20);',
                    "    emit_cost();\n    "
                    + _CRASH_LINE
                    + '\n    puts("s UNSATISFIABLE");\n    exit(20);',
                ),
            ),
        ),
        MutantSpec(
            name="crash_after_print",
            category="crash",
            summary="prints a correct model, then dies before exiting cleanly",
            edits=(
                (
                    '    printf(" 0\\n");\n    exit(10);',
                    '    printf(" 0\\n");\n    fflush(stdout);\n    '
                    + _CRASH_LINE
                    + "\n    exit(10);",
                ),
            ),
        ),
        MutantSpec(
            name="wrong_always_sat",
            category="wrong-answer",
            summary="reports satisfiable even when the search refutes the formula",
            edits=(
                (
                    "static void emit_unsat(void)\n{\n    if (proof) {",
                    "static void emit_unsat(void)\n{\n    emit_sat();\n    if (proof) {",
                ),
            ),
        ),
        MutantSpec(
            name="wrong_always_unsat",
            category="wrong-answer",
            summary="reports unsatisfiable when a model is found",
            edits=(
                (
                    "            int v = pick_branch();\n"
                    "            if (v == 0)\n"
                    "                emit_sat();",
                    "            int v = pick_branch();\n"
                    "            if (v == 0)\n"
                    "                emit_unsat();",
                ),
            ),
        ),
        MutantSpec(
            name="wrong_flip_answers",
            category="wrong-answer",
            summary="swaps both answers; wrong on every decided instance",
            edits=(
                (
                    '    }\n    emit_cost();\n    puts("s UNSATISFIABLE");\n    exit(20);',
                    '    }\n    emit_cost();\n    puts("s SATISFIABLE");\n'
                    '    printf("v 0\\n");\n    exit(10);',
                ),
                (
                    '    emit_cost();\n    puts("s SATISFIABLE");\n    printf("v");',
                    '    emit_cost();\n    puts("s UNSATISFIABLE");\n    exit(20);\n'
                    '    printf("v");',
                ),
            ),
        ),
        MutantSpec(
            name="bad_model",
            category="bad-model",
            summary="claims satisfiable but prints the all-false assignment",
            edits=(
                (
                    "        int lit = assign[v] > 0 ? v : -v;",
                    "        int lit = -v;",
                ),
            ),
        ),
        MutantSpec(
            name="bad_proof_garbage",
            category="bad-proof",
            summary="suppresses lemma literals; the proof is a pile of empty clauses",
            edits=(
                (
                    '        fprintf(proof, "%d ", -declit[i]);',
                    '        fprintf(proof, "%s", "");',
                ),
            ),
        ),
        MutantSpec(
            name="bad_proof_missing",
            category="bad-proof",
            summary="never opens the proof file; unsat claims arrive unproven",
            edits=(
                (
                    '        proof = fopen(argv[2], "w");',
                    '        proof = (argc > 999) ? fopen(argv[2], "w") : NULL;',
                ),
            ),
        ),
        MutantSpec(
            name="exit_code_lie",
            category="malformed-output",
            summary="prints a satisfiable answer but exits with the unsat code",
            edits=(
                (
                    '    printf(" 0\\n");\n    exit(10);',
                    '    printf(" 0\\n");\n    exit(20);',
                ),
            ),
        ),
        MutantSpec(
            name="malformed_values",
            category="malformed-output",
            summary="value lines lose their terminating zero",
            edits=(
                (
                    '    printf(" 0\\n");\n    exit(10);',
                    '    printf("\\n");\n    exit(10);',
                ),
            ),
        ),
        MutantSpec(
            name="hang_on_sat",
            category="timeout",
            summary="spins forever instead of reporting a found model",
            edits=(
                (
                    "            int v = pick_branch();\n"
                    "            if (v == 0)\n"
                    "                emit_sat();",
                    "            int v = pick_branch();\n"
                    "            if (v == 0)\n"
                    "                for (;;) { }",
                ),
            ),
        ),
        MutantSpec(
            name="compile_error",
            category="build-failure",
            summary="references an undeclared constant; the build cannot succeed",
            edits=(
                (
                    "static long decision_budget = DECISION_BUDGET;",
                    "static long decision_budget = DECISION_BUDGET_UNDEFINED;",
                ),
            ),
        ),
    ]
}


def mutant_names() -> Tuple[str, ...]:
    return tuple(MUTANTS)
