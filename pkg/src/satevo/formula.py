"""DIMACS CNF formulas, assignments, model checking, and solver output parsing.

Literals are plain nonzero ints: the sign is the polarity, the magnitude is the
1-based variable index. Clause indices reported to users are 1-based.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

log = logging.getLogger(__name__)

DEFAULT_BRUTE_FORCE_CAP = 24


class FormulaError(Exception):
    """Base for formula-level parse/check failures."""


class MissingHeader(FormulaError):
    pass


class HeaderMismatch(FormulaError):
    pass


class LiteralOutOfRange(FormulaError):
    pass


class UnterminatedClause(FormulaError):
    pass


class TooManyVariables(FormulaError):
    pass


class IncompleteModel(FormulaError):
    pass


class SolverOutputError(Exception):
    """Base for malformed solver output."""


class ConflictingStatus(SolverOutputError):
    pass


class MalformedValueLine(SolverOutputError):
    pass


class ClaimKind(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class CnfFormula:
    """Immutable CNF formula. Clauses are tuples of literals, no trailing 0."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]
    origin: str = "<memory>"
    # 1-based indices of clauses that contain both l and -l (kept, but flagged).
    tautologies: tuple[int, ...] = ()

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def variables(self) -> set[int]:
        return {abs(lit) for cl in self.clauses for lit in cl}


@dataclass(frozen=True)
class Assignment:
    """Partial or total truth assignment, var -> bool."""

    values: Mapping[int, bool]
    total: bool = False

    @classmethod
    def from_literals(cls, lits: Iterable[int], num_vars: Optional[int] = None) -> "Assignment":
        vals: dict[int, bool] = {}
        for lit in lits:
            if lit == 0:
                continue
            vals[abs(lit)] = lit > 0
        total = num_vars is not None and all(v in vals for v in range(1, num_vars + 1))
        return cls(values=vals, total=total)

    def value_of(self, var: int) -> Optional[bool]:
        return self.values.get(var)

    def lit_true(self, lit: int) -> Optional[bool]:
        v = self.values.get(abs(lit))
        if v is None:
            return None
        return v == (lit > 0)


@dataclass(frozen=True)
class SolverClaim:
    """Parsed outcome claim of one solver run."""

    kind: ClaimKind
    model: Optional[Assignment] = None
    proof_path: Optional[str] = None
    raw_exit: int = 0


@dataclass(frozen=True)
class ModelCheck:
    satisfied: bool
    failing_clause: Optional[int] = None  # 1-based, lowest failing index
    defaulted_vars: tuple[int, ...] = ()  # vars treated as false in lenient mode


@dataclass(frozen=True)
class SolveResult:
    kind: ClaimKind
    model: Optional[Assignment] = None


def _tokenize(text: str) -> Iterable[tuple[int, str]]:
    """Yield (line_no, token) pairs, skipping comment lines."""
    for ln, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("%"):
            # SATLIB-style terminator; everything after is padding.
            return
        for tok in stripped.split():
            yield ln, tok


def parse_dimacs(text: str | bytes, origin: str = "<memory>", strict: bool = False) -> CnfFormula:
    """Parse DIMACS CNF text into a CnfFormula.

    Lenient mode (default) warns on a declared-vs-actual clause count mismatch;
    strict mode raises HeaderMismatch. Out-of-range literals and unterminated
    clauses are always errors.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")

    tokens = iter(_tokenize(text))
    num_vars = declared_clauses = None
    for ln, tok in tokens:
        if tok == "p":
            try:
                _, fmt = next(tokens)
                _, nv = next(tokens)
                _, nc = next(tokens)
            except StopIteration:
                raise MissingHeader(f"{origin}: truncated 'p' header") from None
            if fmt != "cnf":
                raise MissingHeader(f"{origin}: expected 'p cnf', got 'p {fmt}'")
            try:
                num_vars, declared_clauses = int(nv), int(nc)
            except ValueError:
                raise MissingHeader(f"{origin}: non-numeric header counts") from None
            if num_vars < 0 or declared_clauses < 0:
                raise MissingHeader(f"{origin}: negative header counts")
            break
        raise MissingHeader(f"{origin}: line {ln}: clause data before 'p cnf' header")
    if num_vars is None:
        raise MissingHeader(f"{origin}: no 'p cnf' header found")

    clauses: list[tuple[int, ...]] = []
    tautologies: list[int] = []
    current: list[int] = []
    last_ln = 0
    for ln, tok in tokens:
        last_ln = ln
        try:
            lit = int(tok)
        except ValueError:
            raise UnterminatedClause(f"{origin}: line {ln}: unexpected token {tok!r}") from None
        if lit == 0:
            seen = set(current)
            if any(-l in seen for l in current):
                tautologies.append(len(clauses) + 1)
            clauses.append(tuple(current))
            current = []
            continue
        if abs(lit) > num_vars:
            raise LiteralOutOfRange(
                f"{origin}: line {ln}: literal {lit} exceeds declared {num_vars} variables"
            )
        current.append(lit)
    if current:
        raise UnterminatedClause(
            f"{origin}: line {last_ln}: end of input inside a clause (missing 0)"
        )

    if declared_clauses != len(clauses):
        msg = f"{origin}: header declares {declared_clauses} clauses, found {len(clauses)}"
        if strict:
            raise HeaderMismatch(msg)
        log.warning("%s", msg)
    if tautologies:
        log.warning("%s: %d tautological clause(s), kept", origin, len(tautologies))

    return CnfFormula(
        num_vars=num_vars,
        clauses=tuple(clauses),
        origin=origin,
        tautologies=tuple(tautologies),
    )


def parse_dimacs_file(path: str | Path, strict: bool = False) -> CnfFormula:
    p = Path(path)
    return parse_dimacs(p.read_bytes(), origin=str(p), strict=strict)


def serialize_dimacs(formula: CnfFormula) -> str:
    """Render a formula back to DIMACS text. parse(serialize(f)) == f up to origin."""
    lines = [f"p cnf {formula.num_vars} {formula.num_clauses}"]
    for cl in formula.clauses:
        lines.append(" ".join(str(l) for l in cl + (0,)))
    return "\n".join(lines) + "\n"


def check_model(formula: CnfFormula, model: Assignment, strict: bool = False) -> ModelCheck:
    """Check a model against every clause.

    Lenient mode treats unassigned variables as false (and reports them);
    strict mode raises IncompleteModel if any variable occurring in the
    formula is unassigned. Reports the lowest failing clause index.
    """
    missing = sorted(v for v in formula.variables() if v not in model.values)
    if missing and strict:
        raise IncompleteModel(
            f"{formula.origin}: model leaves {len(missing)} variable(s) unassigned "
            f"(first: {missing[0]})"
        )
    if missing:
        log.warning(
            "%s: model leaves %d variable(s) unassigned, defaulting to false",
            formula.origin,
            len(missing),
        )

    values = model.values
    for idx, clause in enumerate(formula.clauses, 1):
        sat = False
        for lit in clause:
            v = values.get(abs(lit), False)
            if v == (lit > 0):
                sat = True
                break
        if not sat:
            return ModelCheck(satisfied=False, failing_clause=idx, defaulted_vars=tuple(missing))
    return ModelCheck(satisfied=True, defaulted_vars=tuple(missing))


def brute_force_solve(formula: CnfFormula, cap: int = DEFAULT_BRUTE_FORCE_CAP) -> SolveResult:
    """Exhaustive truth-table solve for small formulas.

    Refuses formulas with more than `cap` variables. Returns the first
    satisfying assignment in lexicographic order (var 1 = lowest bit), total
    over all declared variables.
    """
    n = formula.num_vars
    if n > cap:
        raise TooManyVariables(f"{formula.origin}: {n} variables exceeds brute-force cap {cap}")

    masks = []
    for cl in formula.clauses:
        pos = neg = 0
        for lit in cl:
            bit = 1 << (abs(lit) - 1)
            if lit > 0:
                pos |= bit
            else:
                neg |= bit
        masks.append((pos, neg))

    full = (1 << n) - 1
    for m in range(1 << n):
        inv = full ^ m
        ok = True
        for pos, neg in masks:
            if not (m & pos or inv & neg):
                ok = False
                break
        if ok:
            vals = {v: bool(m & (1 << (v - 1))) for v in range(1, n + 1)}
            return SolveResult(ClaimKind.SAT, Assignment(values=vals, total=True))
    return SolveResult(ClaimKind.UNSAT)


_STATUS_WORDS = {
    "SATISFIABLE": ClaimKind.SAT,
    "UNSATISFIABLE": ClaimKind.UNSAT,
    "UNKNOWN": ClaimKind.UNKNOWN,
}


def parse_solver_output(stdout: str | bytes, exit_code: int) -> SolverClaim:
    """Parse competition-convention solver output into a claim.

    's SATISFIABLE' / 's UNSATISFIABLE' status lines, 'v' value lines
    terminated by 0, and exit codes 10/20 cross-checked against the s-line.
    No s-line and no 10/20 exit is an Unknown claim.
    """
    if isinstance(stdout, bytes):
        stdout = stdout.decode("utf-8", errors="replace")

    status: Optional[ClaimKind] = None
    lits: list[int] = []
    v_terminated = False
    saw_v = False
    for line in stdout.splitlines():
        line = line.strip()
        if line.startswith("s ") or line == "s":
            word = line[1:].strip()
            kind = _STATUS_WORDS.get(word)
            if kind is None:
                raise ConflictingStatus(f"unrecognized status line {line!r}")
            if status is not None and status is not kind:
                raise ConflictingStatus(f"contradictory status lines: {status.value} then {kind.value}")
            status = kind
        elif line == "v" or line.startswith("v "):
            saw_v = True
            if v_terminated and line[1:].strip():
                raise MalformedValueLine("value data after the 0 terminator")
            for tok in line[1:].split():
                try:
                    lit = int(tok)
                except ValueError:
                    raise MalformedValueLine(f"non-integer token {tok!r} in value line") from None
                if v_terminated:
                    raise MalformedValueLine("value data after the 0 terminator")
                if lit == 0:
                    v_terminated = True
                else:
                    lits.append(lit)

    if status is ClaimKind.SAT:
        if exit_code != 10:
            raise ConflictingStatus(f"s SATISFIABLE but exit code {exit_code}")
        if not saw_v or not v_terminated:
            raise MalformedValueLine("SAT claim without a 0-terminated value line")
        seen: dict[int, int] = {}
        for lit in lits:
            prev = seen.get(abs(lit))
            if prev is not None and prev != lit:
                raise MalformedValueLine(f"contradictory literals {prev} and {lit} in model")
            seen[abs(lit)] = lit
        return SolverClaim(kind=ClaimKind.SAT, model=Assignment.from_literals(lits), raw_exit=exit_code)

    if status is ClaimKind.UNSAT:
        if exit_code != 20:
            raise ConflictingStatus(f"s UNSATISFIABLE but exit code {exit_code}")
        return SolverClaim(kind=ClaimKind.UNSAT, raw_exit=exit_code)

    # No definitive s-line. An exit code that promises an answer is a lie.
    if exit_code in (10, 20):
        raise ConflictingStatus(f"exit code {exit_code} without a matching status line")
    return SolverClaim(kind=ClaimKind.UNKNOWN, raw_exit=exit_code)
