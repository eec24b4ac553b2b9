"""DRAT parsing and forward proof checking, cross-checked against an oracle.

The hand-sized verdicts in here were first computed with the saturation-based
oracle in helpers.py and then frozen; the checker must reproduce them exactly.
"""

from __future__ import annotations

import random

import pytest

from helpers import drat_forward_oracle, random_clauses, rat_oracle, rup_oracle
from satevo.drat import (
    NO_REFUTATION,
    DratProof,
    LemmaKind,
    MalformedLemma,
    PropagationState,
    ProofLemma,
    UnterminatedLemma,
    check_proof,
    check_rat,
    check_rup,
    parse_drat,
)
from satevo.formula import CnfFormula, parse_dimacs


def mkf(num_vars: int, clauses) -> CnfFormula:
    return CnfFormula(num_vars=num_vars, clauses=tuple(tuple(c) for c in clauses))


def state_for(num_vars: int, clauses) -> PropagationState:
    state = PropagationState(num_vars)
    for cl in clauses:
        state.add_clause(tuple(cl))
    assert not state.propagate()
    return state


# A satisfiable formula where lemma (1 -3) has RAT on its first literal but is
# not RUP, while the reversed lemma (-3 1) has neither. Distinguishes a checker
# that resolves on the first literal from one that tries every literal.
SPY_CLAUSES = ((-2, 3), (-1, 3), (1, -2), (2, 3))
SPY_LEMMA = (1, -3)

# The four binary clauses over two variables: minimal unsatisfiable core whose
# refutation needs one unit lemma.
ALL_BINARY = ((1, 2), (1, -2), (-1, 2), (-1, -2))


class TestParseDrat:
    def test_add_and_delete_lemmas(self):
        proof = parse_drat("1 2 0\nd -1 3 0\n0\n")
        assert [(lm.kind, lm.clause) for lm in proof.lemmas] == [
            (LemmaKind.ADD, (1, 2)),
            (LemmaKind.DELETE, (-1, 3)),
            (LemmaKind.ADD, ()),
        ]

    def test_comments_and_blank_lines_skipped(self):
        proof = parse_drat("c preamble\n\n1 0\nc midway\n-1 0\n")
        assert len(proof.lemmas) == 2

    def test_lemma_spanning_lines(self):
        proof = parse_drat("1\n2\n0\n")
        assert proof.lemmas == (ProofLemma(kind=LemmaKind.ADD, clause=(1, 2)),)

    def test_two_lemmas_on_one_line(self):
        proof = parse_drat("1 0 d 1 0\n")
        assert [(lm.kind, lm.clause) for lm in proof.lemmas] == [
            (LemmaKind.ADD, (1,)),
            (LemmaKind.DELETE, (1,)),
        ]

    def test_delete_marker_inside_lemma(self):
        with pytest.raises(MalformedLemma):
            parse_drat("1 d 2 0\n")

    def test_non_integer_token(self):
        with pytest.raises(MalformedLemma):
            parse_drat("1 two 0\n")

    def test_unterminated_trailing_literals(self):
        with pytest.raises(UnterminatedLemma):
            parse_drat("1 2\n")

    def test_unterminated_bare_delete_marker(self):
        with pytest.raises(UnterminatedLemma):
            parse_drat("d\n")

    def test_empty_input(self):
        assert parse_drat("").lemmas == ()

    def test_bytes_input(self):
        assert parse_drat(b"-4 0\n").lemmas[0].clause == (-4,)

    def test_max_var(self):
        assert parse_drat("1 -7 0\n3 0\n").max_var() == 7
        assert parse_drat("0\n").max_var() == 0


class TestRupRat:
    def test_spy_lemma_is_rat_but_not_rup(self):
        state = state_for(3, SPY_CLAUSES)
        assert not check_rup(state, SPY_LEMMA)
        assert check_rat(state, SPY_LEMMA, SPY_LEMMA[0])
        assert not rup_oracle(SPY_CLAUSES, SPY_LEMMA)
        assert rat_oracle(SPY_CLAUSES, SPY_LEMMA)

    def test_reversed_spy_lemma_fails_rat_on_its_first_literal(self):
        reversed_lemma = (SPY_LEMMA[1], SPY_LEMMA[0])
        state = state_for(3, SPY_CLAUSES)
        assert not check_rup(state, reversed_lemma)
        assert not check_rat(state, reversed_lemma, reversed_lemma[0])
        assert not rat_oracle(SPY_CLAUSES, reversed_lemma)

    def test_tautological_lemma_is_rup(self):
        state = state_for(2, [(1, 2)])
        assert check_rup(state, (1, -1))

    def test_unit_lemma_rup(self):
        state = state_for(2, ALL_BINARY)
        assert check_rup(state, (1,))
        assert check_rup(state, (-1,))

    def test_vacuous_rat_when_no_clause_holds_negated_pivot(self):
        state = state_for(3, [(1, 2)])
        assert not check_rup(state, (3,))
        assert check_rat(state, (3,), 3)

    def test_rup_ignores_duplicate_lemma_literals(self):
        state = state_for(2, ALL_BINARY)
        assert check_rup(state, (1, 1))


class TestCheckProofFrozen:
    """End-to-end verdicts, each first computed with the forward oracle."""

    def verdict(self, num_vars, clauses, proof_text):
        formula = mkf(num_vars, clauses)
        verdict = check_proof(formula, parse_drat(proof_text))
        steps = [
            ("d" if lm.kind is LemmaKind.DELETE else "a", lm.clause)
            for lm in parse_drat(proof_text).lemmas
        ]
        assert drat_forward_oracle([tuple(c) for c in clauses], steps) == verdict.valid
        return verdict

    def test_formula_conflicting_by_propagation_needs_no_lemmas(self):
        v = self.verdict(2, [(1,), (-1, 2), (-2,)], "")
        assert v.valid
        assert v.lemmas_checked == 0
        assert v.reason == "formula conflicts by propagation"

    def test_unit_lemma_closes_all_binary(self):
        v = self.verdict(2, ALL_BINARY, "1 0")
        assert v.valid
        assert v.lemmas_checked == 1

    def test_trailing_empty_clause_not_reached_after_conflict(self):
        v = self.verdict(2, ALL_BINARY, "1 0\n0")
        assert v.valid
        assert v.lemmas_checked == 1

    def test_bare_empty_clause_rejected_when_not_rup(self):
        v = self.verdict(2, ALL_BINARY, "0")
        assert not v.valid
        assert v.failed_lemma == 1
        assert v.reason == "empty clause is not RUP"

    def test_deletions_can_break_a_derivation(self):
        v = self.verdict(2, ALL_BINARY, "d 1 2 0\nd 1 -2 0\n1 0")
        assert not v.valid
        assert v.failed_lemma == 3
        assert v.lemmas_checked == 1
        assert v.reason == "lemma is neither RUP nor RAT"

    def test_single_deletion_breaks_unit_lemma(self):
        v = self.verdict(2, ALL_BINARY, "d 1 2 0\n1 0")
        assert not v.valid
        assert v.failed_lemma == 2

    def test_satisfiable_formula_empty_proof(self):
        v = self.verdict(2, [(1, 2)], "")
        assert not v.valid
        assert v.reason == NO_REFUTATION
        assert v.lemmas_checked == 0

    def test_vacuous_rat_lemma_accepted_but_no_refutation(self):
        v = self.verdict(3, [(1, 2)], "3 0")
        assert not v.valid
        assert v.reason == NO_REFUTATION
        assert v.lemmas_checked == 1

    def test_spy_lemma_accepted_in_forward_direction(self):
        v = self.verdict(3, SPY_CLAUSES, "1 -3 0")
        assert not v.valid
        assert v.reason == NO_REFUTATION
        assert v.lemmas_checked == 1

    def test_spy_lemma_rejected_when_reversed(self):
        v = self.verdict(3, SPY_CLAUSES, "-3 1 0")
        assert not v.valid
        assert v.failed_lemma == 1
        assert v.reason == "lemma is neither RUP nor RAT"

    def test_verdict_truthiness(self):
        assert check_proof(mkf(2, ALL_BINARY), parse_drat("1 0"))
        assert not check_proof(mkf(2, [(1, 2)]), parse_drat(""))


class TestCheckProofRandomized:
    def test_agrees_with_forward_oracle_on_random_proofs(self):
        rng = random.Random(2024)
        agree = 0
        for _ in range(400):
            n = rng.randint(3, 6)
            clauses = random_clauses(rng, n, rng.randint(4, 16))
            steps = []
            lines = []
            for _ in range(rng.randint(1, 7)):
                if clauses and rng.random() < 0.25:
                    victim = rng.choice(clauses)
                    steps.append(("d", tuple(victim)))
                    lines.append("d " + " ".join(map(str, victim)) + " 0")
                else:
                    width = rng.randint(0, 3)
                    lemma = tuple(
                        rng.choice((1, -1)) * rng.randint(1, n) for _ in range(width)
                    )
                    steps.append(("a", lemma))
                    lines.append(" ".join(map(str, lemma + (0,))))
            formula = mkf(n, clauses)
            verdict = check_proof(formula, parse_drat("\n".join(lines)))
            assert verdict.valid == drat_forward_oracle(clauses, steps)
            agree += 1
        assert agree == 400


class TestPropagationState:
    def test_delete_missing_clause_reports_false(self):
        state = state_for(2, [(1, 2)])
        assert not state.delete_clause((1, -2))

    def test_delete_present_clause(self):
        state = state_for(3, [(1, 2), (2, 3)])
        assert state.delete_clause((2, 1))  # literal order must not matter
        assert not state.delete_clause((1, 2))  # already inactive

    def test_unit_and_empty_deletions_ignored(self):
        state = state_for(2, [(1,), (1, 2)])
        assert state.delete_clause((1,))
        assert state.delete_clause(())

    def test_empty_clause_sets_conflict(self):
        state = PropagationState(1)
        state.add_clause(())
        assert state.conflict

    def test_contradictory_units_set_conflict(self):
        state = PropagationState(1)
        state.add_clause((1,))
        state.add_clause((-1,))
        assert state.conflict

    def test_from_formula_propagates_nothing_eagerly(self):
        state = PropagationState.from_formula(mkf(2, [(1,), (-1, 2)]))
        assert not state.propagate()
        assert state.value(2) is True
