"""The reference CDCL solver against brute force, with proof/model validation."""

from __future__ import annotations

import random

from helpers import brute_force_oracle, random_clauses
from satevo.drat import check_proof, parse_drat
from satevo.formula import ClaimKind, CnfFormula, check_model
from satevo.refsolver import as_solve_result, emit_drat, solve_formula
from satevo.suites import (
    contradiction_chain,
    parity_contradiction,
    pigeonhole,
    pure_literal,
    random_ksat,
    unit_chain,
)


def random_formula(rng: random.Random, max_vars: int = 10) -> CnfFormula:
    n = rng.randint(2, max_vars)
    ratio = rng.uniform(2.0, 6.5)
    return CnfFormula(
        num_vars=n, clauses=tuple(random_clauses(rng, n, max(1, int(n * ratio))))
    )


class TestAgainstBruteForce:
    def test_answers_match_on_random_formulas(self):
        rng = random.Random(99)
        sat = unsat = 0
        for _ in range(300):
            formula = random_formula(rng)
            expected, _ = brute_force_oracle(formula.num_vars, formula.clauses)
            result = solve_formula(formula)
            assert result.kind.value == expected
            if result.kind is ClaimKind.SAT:
                sat += 1
            else:
                unsat += 1
        # The ratio range straddles the phase transition; both kinds must show up.
        assert sat > 50 and unsat > 50

    def test_models_are_total_and_check_out(self):
        rng = random.Random(5)
        seen = 0
        while seen < 60:
            formula = random_formula(rng)
            result = solve_formula(formula)
            if result.kind is not ClaimKind.SAT:
                continue
            seen += 1
            assert result.model is not None and result.model.total
            assert check_model(formula, result.model).satisfied

    def test_refutations_validate_as_drat(self):
        rng = random.Random(6)
        seen = 0
        while seen < 60:
            formula = random_formula(rng)
            result = solve_formula(formula)
            if result.kind is not ClaimKind.UNSAT:
                continue
            seen += 1
            assert result.proof and result.proof[-1] == ()
            verdict = check_proof(formula, parse_drat(emit_drat(result.proof)))
            assert verdict.valid, verdict.reason


class TestCraftedFamilies:
    def test_unit_chain_and_pure_literal_sat(self):
        for formula in (unit_chain(12), pure_literal(9)):
            result = solve_formula(formula)
            assert result.kind is ClaimKind.SAT
            assert check_model(formula, result.model).satisfied

    def test_contradiction_chain_unsat_with_valid_proof(self):
        formula = contradiction_chain(10)
        result = solve_formula(formula)
        assert result.kind is ClaimKind.UNSAT
        assert check_proof(formula, parse_drat(emit_drat(result.proof))).valid

    def test_pigeonhole_unsat_with_valid_proof(self):
        formula = pigeonhole(4)
        result = solve_formula(formula)
        assert result.kind is ClaimKind.UNSAT
        assert check_proof(formula, parse_drat(emit_drat(result.proof))).valid

    def test_parity_contradiction_unsat_with_valid_proof(self):
        formula = parity_contradiction(9)
        result = solve_formula(formula)
        assert result.kind is ClaimKind.UNSAT
        assert check_proof(formula, parse_drat(emit_drat(result.proof))).valid

    def test_immediate_input_conflict_still_yields_a_proof(self):
        formula = CnfFormula(num_vars=1, clauses=((1,), (-1,)))
        result = solve_formula(formula)
        assert result.kind is ClaimKind.UNSAT
        assert check_proof(formula, parse_drat(emit_drat(result.proof))).valid

    def test_empty_clause_in_input(self):
        formula = CnfFormula(num_vars=2, clauses=((1, 2), ()))
        result = solve_formula(formula)
        assert result.kind is ClaimKind.UNSAT


class TestBudget:
    def test_budget_exhaustion_reports_unknown(self):
        rng = random.Random(13)
        formula = random_ksat(rng, 60, 255)
        result = solve_formula(formula, decision_budget=1)
        assert result.kind is ClaimKind.UNKNOWN
        assert result.decisions <= 1

    def test_generous_budget_still_answers(self):
        formula = pigeonhole(3)
        result = solve_formula(formula, decision_budget=10_000)
        assert result.kind is ClaimKind.UNSAT


class TestAdapters:
    def test_as_solve_result_carries_kind_and_model(self):
        formula = unit_chain(3)
        result = solve_formula(formula)
        adapted = as_solve_result(result)
        assert adapted.kind is result.kind
        assert adapted.model is result.model

    def test_emit_drat_round_trips_through_parser(self):
        text = emit_drat([(1, -2), (), (3,)])
        lemmas = parse_drat(text).lemmas
        assert [lm.clause for lm in lemmas] == [(1, -2), (), (3,)]
        assert emit_drat([]) == ""
