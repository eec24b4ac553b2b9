"""Independent oracles used to cross-check the package implementations.

Everything here is written against the plainest possible algorithm: truth
tables by literal iteration, brute force via itertools.product, and unit
propagation by rescanning the whole clause list until fixpoint. None of it
shares code with the package, so agreement between the two is evidence,
not tautology.
"""

from __future__ import annotations

import itertools
import random
from typing import Iterable, Optional, Sequence

Clause = Sequence[int]


def eval_clause(clause: Clause, values: dict[int, bool]) -> bool:
    return any(values.get(abs(lit), False) == (lit > 0) for lit in clause)


def eval_formula(clauses: Iterable[Clause], values: dict[int, bool]) -> bool:
    return all(eval_clause(cl, values) for cl in clauses)


def first_falsified(clauses: Sequence[Clause], values: dict[int, bool]) -> Optional[int]:
    """1-based index of the lowest falsified clause, or None."""
    for idx, cl in enumerate(clauses, 1):
        if not eval_clause(cl, values):
            return idx
    return None


def brute_force_oracle(
    num_vars: int, clauses: Sequence[Clause]
) -> tuple[str, Optional[dict[int, bool]]]:
    """Exhaustive SAT check via itertools.product, lowest-variable-fastest.

    Mirrors the package convention that variable 1 is the least significant
    position, so the first model found matches brute_force_solve's. The
    first product coordinate varies slowest, so it holds the highest variable.
    """
    for bits in itertools.product((False, True), repeat=num_vars):
        values = {num_vars - i: bits[i] for i in range(num_vars)}
        if eval_formula(clauses, values):
            return "SAT", values
    return "UNSAT", None


def count_models(num_vars: int, clauses: Sequence[Clause]) -> int:
    total = 0
    for bits in itertools.product((False, True), repeat=num_vars):
        values = {v: bits[v - 1] for v in range(1, num_vars + 1)}
        if eval_formula(clauses, values):
            total += 1
    return total


# ------------------------------------------------------------- propagation


def saturate(clauses: Sequence[Clause], assumptions: Iterable[int] = ()) -> Optional[dict[int, bool]]:
    """Naive unit propagation to fixpoint; None signals a conflict.

    Rescans every clause on every pass. Slow and obviously correct.
    """
    values: dict[int, bool] = {}
    for lit in assumptions:
        want = lit > 0
        if values.get(abs(lit), want) != want:
            return None
        values[abs(lit)] = want
    changed = True
    while changed:
        changed = False
        for cl in clauses:
            unassigned = []
            satisfied = False
            for lit in dict.fromkeys(cl):
                v = values.get(abs(lit))
                if v is None:
                    unassigned.append(lit)
                elif v == (lit > 0):
                    satisfied = True
                    break
            if satisfied:
                continue
            if not unassigned:
                return None
            if len(unassigned) == 1:
                lit = unassigned[0]
                values[abs(lit)] = lit > 0
                changed = True
    return values


def rup_oracle(clauses: Sequence[Clause], lemma: Clause) -> bool:
    """Reverse unit propagation: negate the lemma, expect a conflict."""
    seen: dict[int, int] = {}
    assumptions = []
    for lit in lemma:
        if seen.get(abs(lit), lit) != lit:
            # The lemma is a tautology; its negation is immediately conflicting.
            return True
        seen[abs(lit)] = lit
        assumptions.append(-lit)
    return saturate(clauses, assumptions) is None


def rat_oracle(clauses: Sequence[Clause], lemma: Clause) -> bool:
    """RUP, or RAT on the lemma's first literal."""
    if rup_oracle(clauses, lemma):
        return True
    if not lemma:
        return False
    pivot = lemma[0]
    for cl in clauses:
        if -pivot in cl:
            resolvent = list(lemma) + [l for l in cl if l != -pivot]
            if not rup_oracle(clauses, resolvent):
                return False
    return True


def drat_forward_oracle(
    clauses: Sequence[Clause], lemmas: Sequence[tuple[str, Clause]]
) -> bool:
    """Forward DRAT check over ('a'|'d', clause) pairs, saturation-based.

    Valid when an empty clause is verified or the accumulated database
    conflicts under top-level propagation after a lemma is added.
    """
    db = [tuple(cl) for cl in clauses]
    if saturate(db) is None:
        return True
    for kind, clause in lemmas:
        if kind == "d":
            key = tuple(sorted(set(clause)))
            if len(key) <= 1:
                continue
            for i, cl in enumerate(db):
                if tuple(sorted(set(cl))) == key:
                    del db[i]
                    break
            continue
        if not rat_oracle(db, clause):
            return False
        if not clause:
            return True
        db.append(tuple(clause))
        if saturate(db) is None:
            return True
    return False


# ------------------------------------------------------------------ corpora


def random_clauses(
    rng: random.Random, num_vars: int, num_clauses: int, width: int = 3
) -> list[tuple[int, ...]]:
    """Plain random clauses, distinct variables inside each clause."""
    out = []
    for _ in range(num_clauses):
        size = min(width, num_vars)
        vs = rng.sample(range(1, num_vars + 1), size)
        out.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return out


def random_total_assignment(rng: random.Random, num_vars: int) -> dict[int, bool]:
    return {v: rng.random() < 0.5 for v in range(1, num_vars + 1)}
