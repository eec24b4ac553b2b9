"""DRAT proof parsing and forward validation.

Checks each added lemma for RUP (reverse unit propagation: assume the
negation, propagate, expect a conflict) and falls back to RAT on the first
literal as pivot. Textual DRAT only; the binary format is a documented
non-goal and would slot in as an alternate parser.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .formula import CnfFormula

log = logging.getLogger(__name__)

NO_REFUTATION = "proof exhausted without deriving the empty clause"


class ProofError(Exception):
    """Base for DRAT parse failures."""


class MalformedLemma(ProofError):
    pass


class UnterminatedLemma(ProofError):
    pass


class LemmaKind(str, Enum):
    ADD = "a"
    DELETE = "d"


@dataclass(frozen=True)
class ProofLemma:
    kind: LemmaKind
    clause: tuple[int, ...]


@dataclass(frozen=True)
class DratProof:
    lemmas: tuple[ProofLemma, ...]
    source: str = "<memory>"

    def max_var(self) -> int:
        return max((abs(l) for lm in self.lemmas for l in lm.clause), default=0)


@dataclass(frozen=True)
class ProofVerdict:
    valid: bool
    failed_lemma: Optional[int] = None  # 1-based index into the lemma list
    reason: Optional[str] = None
    lemmas_checked: int = 0

    def __bool__(self) -> bool:
        return self.valid


def parse_drat(text: str | bytes, source: str = "<memory>") -> DratProof:
    """Parse textual DRAT: optional 'd' prefix, 0-terminated integer lemmas."""
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")

    lemmas: list[ProofLemma] = []
    kind = LemmaKind.ADD
    current: list[int] = []
    in_lemma = False
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        for tok in line.split():
            if tok == "d":
                if in_lemma:
                    raise MalformedLemma(f"{source}: line {ln}: 'd' inside a lemma")
                kind = LemmaKind.DELETE
                in_lemma = True
                continue
            try:
                lit = int(tok)
            except ValueError:
                raise MalformedLemma(f"{source}: line {ln}: unexpected token {tok!r}") from None
            if lit == 0:
                lemmas.append(ProofLemma(kind=kind, clause=tuple(current)))
                current = []
                kind = LemmaKind.ADD
                in_lemma = False
            else:
                current.append(lit)
                in_lemma = True
    if in_lemma or current:
        raise UnterminatedLemma(f"{source}: end of input inside a lemma (missing 0)")
    return DratProof(lemmas=tuple(lemmas), source=source)


def parse_drat_file(path: str | Path) -> DratProof:
    p = Path(path)
    return parse_drat(p.read_bytes(), source=str(p))


class PropagationState:
    """Two-watched-literal clause database with an assumption trail.

    The trail below `mark()` level is the persistent top-level; check_rup
    pushes assumptions above a mark and undoes back to it. Clauses are lists
    whose first two positions are the watched literals. Unit clauses are not
    watched; their literals are enqueued at the top level directly.
    """

    def __init__(self, num_vars: int) -> None:
        self.num_vars = num_vars
        self.assign: dict[int, bool] = {}
        self.trail: list[tuple[int, Optional[int]]] = []  # (literal, reason clause id)
        self.qhead = 0
        self.clauses: dict[int, list[int]] = {}
        self.active: set[int] = set()
        self.watches: dict[int, list[int]] = {}
        self._by_key: dict[tuple[int, ...], list[int]] = {}
        self._next_cid = 0
        self.conflict = False  # permanent top-level conflict

    @classmethod
    def from_formula(cls, formula: CnfFormula, extra_vars: int = 0) -> "PropagationState":
        state = cls(max(formula.num_vars, extra_vars))
        for cl in formula.clauses:
            state.add_clause(cl)
        return state

    def value(self, lit: int) -> Optional[bool]:
        v = self.assign.get(abs(lit))
        if v is None:
            return None
        return v == (lit > 0)

    def mark(self) -> int:
        return len(self.trail)

    def undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            lit, _ = self.trail.pop()
            del self.assign[abs(lit)]
        self.qhead = mark

    def _enqueue(self, lit: int, reason: Optional[int]) -> None:
        self.assign[abs(lit)] = lit > 0
        self.trail.append((lit, reason))

    def assume(self, lit: int) -> bool:
        """Assign lit as an assumption. False means it contradicts the trail."""
        v = self.value(lit)
        if v is True:
            return True
        if v is False:
            return False
        self._enqueue(lit, None)
        return True

    def add_clause(self, lits: Iterable[int]) -> Optional[int]:
        """Add a clause at the top level. May set the permanent conflict flag."""
        unique: list[int] = list(dict.fromkeys(lits))
        cid = self._next_cid
        self._next_cid += 1
        self.clauses[cid] = unique
        self.active.add(cid)
        self._by_key.setdefault(tuple(sorted(unique)), []).append(cid)

        if not unique:
            self.conflict = True
            return cid
        if len(unique) == 1:
            lit = unique[0]
            v = self.value(lit)
            if v is False:
                self.conflict = True
            elif v is None:
                self._enqueue(lit, cid)
            return cid

        # Prefer non-false literals in the watch positions.
        nonfalse = [i for i, l in enumerate(unique) if self.value(l) is not False]
        if len(nonfalse) == 0:
            self.conflict = True
            # Still attach watches so later unassignment behaves; first two will do.
        elif len(nonfalse) == 1:
            i = nonfalse[0]
            unique[0], unique[i] = unique[i], unique[0]
            if self.value(unique[0]) is None:
                self._enqueue(unique[0], cid)
        else:
            i, j = nonfalse[0], nonfalse[1]
            unique[0], unique[i] = unique[i], unique[0]
            if j == 0:
                j = i
            unique[1], unique[j] = unique[j], unique[1]
        self.watches.setdefault(unique[0], []).append(cid)
        self.watches.setdefault(unique[1], []).append(cid)
        return cid

    def delete_clause(self, lits: Iterable[int]) -> bool:
        """Deactivate one clause matching the literal multiset.

        Deleting a clause that is not present is a warning. Unit (and empty)
        clause deletions are ignored so the top-level trail stays sound,
        matching common checker behavior.
        """
        key = tuple(sorted(dict.fromkeys(lits)))
        if len(key) <= 1:
            log.debug("ignoring deletion of unit clause %s", key)
            return True
        for cid in self._by_key.get(key, ()):
            if cid in self.active:
                self.active.remove(cid)
                return True
        log.warning("deletion of clause %s not in database, skipped", key)
        return False

    def propagate(self) -> bool:
        """Unit-propagate from qhead. True means a conflict was reached."""
        while self.qhead < len(self.trail):
            lit, _ = self.trail[self.qhead]
            self.qhead += 1
            neg = -lit
            ws = self.watches.get(neg)
            if not ws:
                continue
            i = 0
            while i < len(ws):
                cid = ws[i]
                if cid not in self.active:
                    ws[i] = ws[-1]
                    ws.pop()
                    continue
                lits = self.clauses[cid]
                if lits[0] == neg:
                    lits[0], lits[1] = lits[1], lits[0]
                other = lits[0]
                if self.value(other) is True:
                    i += 1
                    continue
                moved = False
                for j in range(2, len(lits)):
                    if self.value(lits[j]) is not False:
                        lits[1], lits[j] = lits[j], lits[1]
                        self.watches.setdefault(lits[1], []).append(cid)
                        ws[i] = ws[-1]
                        ws.pop()
                        moved = True
                        break
                if moved:
                    continue
                if self.value(other) is False:
                    return True
                self._enqueue(other, cid)
                i += 1
        return False


def check_rup(state: PropagationState, clause: Iterable[int]) -> bool:
    """True iff assuming the negation of every literal propagates to a conflict."""
    mark = state.mark()
    conflict = False
    for lit in dict.fromkeys(clause):
        if not state.assume(-lit):
            conflict = True
            break
    if not conflict:
        conflict = state.propagate()
    state.undo_to(mark)
    return conflict


def check_rat(state: PropagationState, clause: tuple[int, ...], pivot: int) -> bool:
    """RAT check on `pivot`: every resolvent on -pivot must be RUP.

    Vacuously true when no active clause contains -pivot.
    """
    for cid in sorted(state.active):
        lits = state.clauses[cid]
        if -pivot not in lits:
            continue
        resolvent = list(clause) + [l for l in lits if l != -pivot]
        if not check_rup(state, resolvent):
            return False
    return True


def check_proof(formula: CnfFormula, proof: DratProof) -> ProofVerdict:
    """Forward-check a DRAT proof against a formula.

    Valid iff an empty clause is verified or the database becomes conflicting
    under top-level propagation. Lemma indices in verdicts are 1-based.
    """
    state = PropagationState(max(formula.num_vars, proof.max_var()))
    for cl in formula.clauses:
        state.add_clause(cl)
    if state.conflict or state.propagate():
        state.conflict = True
        return ProofVerdict(valid=True, lemmas_checked=0, reason="formula conflicts by propagation")

    checked = 0
    for idx, lemma in enumerate(proof.lemmas, 1):
        if lemma.kind is LemmaKind.DELETE:
            state.delete_clause(lemma.clause)
            continue
        checked += 1
        if not check_rup(state, lemma.clause):
            if not lemma.clause:
                return ProofVerdict(False, idx, "empty clause is not RUP", checked)
            if not check_rat(state, lemma.clause, lemma.clause[0]):
                return ProofVerdict(False, idx, "lemma is neither RUP nor RAT", checked)
        if not lemma.clause:
            return ProofVerdict(valid=True, lemmas_checked=checked)
        state.add_clause(lemma.clause)
        if state.conflict or state.propagate():
            state.conflict = True
            return ProofVerdict(valid=True, lemmas_checked=checked)
    return ProofVerdict(False, None, NO_REFUTATION, checked)


def check_proof_file(formula: CnfFormula, proof_path: str | Path) -> ProofVerdict:
    return check_proof(formula, parse_drat_file(proof_path))
