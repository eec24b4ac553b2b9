"""Reference CDCL solver with 1-UIP learning and DRAT lemma logging.

Tooling aid for tests and suite generation: produces an independent answer,
a total model for satisfiable formulas, and a forward-checkable refutation
for unsatisfiable ones. Learned clauses are RUP at the moment of learning,
so the logged lemma sequence (plus the final empty clause) is a DRAT proof.

Not wired into any benchmark path; candidate solvers under evaluation are
external binaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .formula import Assignment, ClaimKind, CnfFormula, SolveResult


@dataclass
class CdclResult:
    kind: ClaimKind
    model: Optional[Assignment] = None
    proof: list[tuple[int, ...]] = field(default_factory=list)
    decisions: int = 0
    conflicts: int = 0


class _Solver:
    def __init__(self, num_vars: int) -> None:
        self.nv = num_vars
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.assign: dict[int, bool] = {}
        self.level: dict[int, int] = {}
        self.reason: dict[int, int] = {}
        self.trail: list[int] = []
        self.lim: list[int] = []
        self.qhead = 0
        self.activity: dict[int, float] = {v: 0.0 for v in range(1, num_vars + 1)}
        self.var_inc = 1.0
        self.phase: dict[int, bool] = {}
        self.proof: list[tuple[int, ...]] = []
        self.root_conflict = False
        self.decisions = 0
        self.conflicts = 0

    def value(self, lit: int) -> Optional[bool]:
        v = self.assign.get(abs(lit))
        if v is None:
            return None
        return v == (lit > 0)

    def current_level(self) -> int:
        return len(self.lim)

    def enqueue(self, lit: int, reason: int = -1) -> None:
        var = abs(lit)
        self.assign[var] = lit > 0
        self.level[var] = self.current_level()
        self.reason[var] = reason
        self.trail.append(lit)

    def attach(self, lits: list[int]) -> int:
        cid = len(self.clauses)
        self.clauses.append(lits)
        if len(lits) >= 2:
            self.watches.setdefault(lits[0], []).append(cid)
            self.watches.setdefault(lits[1], []).append(cid)
        return cid

    def add_input_clause(self, clause: tuple[int, ...]) -> bool:
        """Add an original clause; False signals immediate unsatisfiability."""
        lits = list(dict.fromkeys(clause))
        if any(-l in lits for l in lits):
            return True  # tautology, irrelevant to search
        if not lits:
            self.root_conflict = True
            return False
        if len(lits) == 1:
            v = self.value(lits[0])
            if v is False:
                self.root_conflict = True
                return False
            if v is None:
                self.enqueue(lits[0], -1)
            return True
        self.attach(lits)
        return True

    def propagate(self) -> int:
        """Returns the conflicting clause id, or -1 at fixpoint."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            neg = -lit
            ws = self.watches.get(neg)
            if not ws:
                continue
            i = 0
            while i < len(ws):
                cid = ws[i]
                lits = self.clauses[cid]
                if lits[0] == neg:
                    lits[0], lits[1] = lits[1], lits[0]
                if self.value(lits[0]) is True:
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
                if self.value(lits[0]) is False:
                    return cid
                self.enqueue(lits[0], cid)
                i += 1
        return -1

    def bump(self, var: int) -> None:
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            for v in self.activity:
                self.activity[v] *= 1e-100
            self.var_inc *= 1e-100

    def analyze(self, confl: int) -> tuple[list[int], int]:
        """1-UIP conflict analysis. Returns (learnt clause, backjump level)."""
        learnt: list[int] = []
        seen: set[int] = set()
        counter = 0
        p = 0  # 0 = start from the conflict clause itself
        idx = len(self.trail) - 1
        cur = self.current_level()
        reason_lits = list(self.clauses[confl])
        while True:
            for q in reason_lits:
                if q == p:
                    continue
                var = abs(q)
                if var in seen or self.level[var] == 0:
                    continue
                seen.add(var)
                self.bump(var)
                if self.level[var] == cur:
                    counter += 1
                else:
                    learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen.remove(abs(p))
            counter -= 1
            if counter == 0:
                break
            rid = self.reason[abs(p)]
            reason_lits = list(self.clauses[rid])
        learnt.insert(0, -p)
        back = 0
        if len(learnt) > 1:
            # Move the highest-level non-asserting literal to the second watch.
            bi = max(range(1, len(learnt)), key=lambda k: self.level[abs(learnt[k])])
            learnt[1], learnt[bi] = learnt[bi], learnt[1]
            back = self.level[abs(learnt[1])]
        return learnt, back

    def backtrack(self, level: int) -> None:
        while self.lim and len(self.lim) > level:
            limit = self.lim.pop()
            while len(self.trail) > limit:
                lit = self.trail.pop()
                var = abs(lit)
                self.phase[var] = self.assign[var]
                del self.assign[var]
                del self.level[var]
                del self.reason[var]
        self.qhead = len(self.trail)

    def pick_branch(self) -> int:
        best = 0
        best_act = -1.0
        for v in range(1, self.nv + 1):
            if v not in self.assign and self.activity[v] > best_act:
                best = v
                best_act = self.activity[v]
        if best == 0:
            return 0
        return best if self.phase.get(best, True) else -best

    def solve(self, decision_budget: Optional[int] = None) -> CdclResult:
        if self.root_conflict:
            self.proof.append(())
            return CdclResult(ClaimKind.UNSAT, proof=self.proof)
        if self.propagate() != -1:
            self.proof.append(())
            return CdclResult(
                ClaimKind.UNSAT, proof=self.proof, conflicts=self.conflicts
            )
        conflicts_since_restart = 0
        restart_limit = 64
        while True:
            confl = self.propagate()
            if confl != -1:
                self.conflicts += 1
                conflicts_since_restart += 1
                if self.current_level() == 0:
                    self.proof.append(())
                    return CdclResult(
                        ClaimKind.UNSAT,
                        proof=self.proof,
                        decisions=self.decisions,
                        conflicts=self.conflicts,
                    )
                learnt, back = self.analyze(confl)
                self.proof.append(tuple(learnt))
                self.backtrack(back)
                if len(learnt) == 1:
                    if self.value(learnt[0]) is None:
                        self.enqueue(learnt[0], -1)
                else:
                    cid = self.attach(learnt)
                    self.enqueue(learnt[0], cid)
                self.var_inc /= 0.95
                if conflicts_since_restart >= restart_limit:
                    conflicts_since_restart = 0
                    restart_limit = int(restart_limit * 1.5)
                    self.backtrack(0)
                continue
            lit = self.pick_branch()
            if lit == 0:
                model = Assignment(values=dict(self.assign), total=True)
                return CdclResult(
                    ClaimKind.SAT,
                    model=model,
                    proof=self.proof,
                    decisions=self.decisions,
                    conflicts=self.conflicts,
                )
            if decision_budget is not None and self.decisions >= decision_budget:
                return CdclResult(
                    ClaimKind.UNKNOWN,
                    proof=self.proof,
                    decisions=self.decisions,
                    conflicts=self.conflicts,
                )
            self.decisions += 1
            self.lim.append(len(self.trail))
            self.enqueue(lit, -1)


def solve_formula(formula: CnfFormula, decision_budget: Optional[int] = None) -> CdclResult:
    solver = _Solver(formula.num_vars)
    for cl in formula.clauses:
        if not solver.add_input_clause(cl):
            solver.proof.append(())
            return CdclResult(ClaimKind.UNSAT, proof=solver.proof)
    return solver.solve(decision_budget=decision_budget)


def emit_drat(proof: list[tuple[int, ...]]) -> str:
    """Render logged lemmas as textual DRAT."""
    lines = []
    for clause in proof:
        lines.append(" ".join(str(l) for l in clause + (0,)))
    return "\n".join(lines) + ("\n" if lines else "")


def as_solve_result(result: CdclResult) -> SolveResult:
    return SolveResult(kind=result.kind, model=result.model)
