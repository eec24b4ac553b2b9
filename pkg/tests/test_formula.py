"""Contract tests for DIMACS parsing, model checking, and solver-output parsing."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (
    brute_force_oracle,
    eval_formula,
    first_falsified,
    random_clauses,
    random_total_assignment,
)
from satevo.formula import (
    Assignment,
    ClaimKind,
    CnfFormula,
    ConflictingStatus,
    HeaderMismatch,
    IncompleteModel,
    LiteralOutOfRange,
    MalformedValueLine,
    MissingHeader,
    TooManyVariables,
    UnterminatedClause,
    brute_force_solve,
    check_model,
    parse_dimacs,
    parse_solver_output,
    serialize_dimacs,
)


@st.composite
def formulas(draw, max_vars: int = 8, max_clauses: int = 12):
    n = draw(st.integers(min_value=1, max_value=max_vars))
    lit = st.integers(min_value=-n, max_value=n).filter(lambda l: l != 0)
    clause = st.lists(lit, min_size=0, max_size=4).map(tuple)
    clauses = draw(st.lists(clause, min_size=0, max_size=max_clauses).map(tuple))
    return CnfFormula(num_vars=n, clauses=clauses)


class TestParseDimacs:
    def test_basic(self):
        text = "c a comment\np cnf 3 2\n1 -3 0\n2 3 -1 0\n"
        f = parse_dimacs(text)
        assert f.num_vars == 3
        assert f.clauses == ((1, -3), (2, 3, -1))
        assert f.tautologies == ()

    def test_clause_spanning_lines_and_shared_lines(self):
        text = "p cnf 4 3\n1 2\n-3 0 4 0\n-1\n-2\n0\n"
        f = parse_dimacs(text)
        assert f.clauses == ((1, 2, -3), (4,), (-1, -2))

    def test_satlib_percent_terminator(self):
        text = "p cnf 2 1\n1 2 0\n%\n0\nthis is padding\n"
        f = parse_dimacs(text)
        assert f.clauses == ((1, 2),)

    def test_empty_clause_is_kept(self):
        f = parse_dimacs("p cnf 2 2\n0\n1 0\n")
        assert f.clauses == ((), (1,))

    def test_tautology_flagged_but_kept(self):
        f = parse_dimacs("p cnf 2 2\n1 -1 0\n2 0\n")
        assert f.clauses == ((1, -1), (2,))
        assert f.tautologies == (1,)

    def test_data_before_header(self):
        with pytest.raises(MissingHeader):
            parse_dimacs("1 2 0\np cnf 2 1\n")

    def test_no_header(self):
        with pytest.raises(MissingHeader):
            parse_dimacs("c nothing here\n")

    def test_truncated_header(self):
        with pytest.raises(MissingHeader):
            parse_dimacs("p cnf 3\n")

    def test_wrong_format_word(self):
        with pytest.raises(MissingHeader):
            parse_dimacs("p sat 3 1\n1 0\n")

    def test_non_numeric_counts(self):
        with pytest.raises(MissingHeader):
            parse_dimacs("p cnf three 1\n")

    def test_negative_counts(self):
        with pytest.raises(MissingHeader):
            parse_dimacs("p cnf -3 1\n")

    def test_literal_out_of_range(self):
        with pytest.raises(LiteralOutOfRange):
            parse_dimacs("p cnf 2 1\n1 3 0\n")

    def test_unterminated_clause(self):
        with pytest.raises(UnterminatedClause):
            parse_dimacs("p cnf 2 1\n1 2\n")

    def test_garbage_token_inside_clause(self):
        with pytest.raises(UnterminatedClause):
            parse_dimacs("p cnf 2 1\n1 x 0\n")

    def test_clause_count_mismatch_lenient_vs_strict(self):
        text = "p cnf 2 5\n1 0\n"
        f = parse_dimacs(text)
        assert f.num_clauses == 1
        with pytest.raises(HeaderMismatch):
            parse_dimacs(text, strict=True)

    def test_bytes_input(self):
        f = parse_dimacs(b"p cnf 1 1\n1 0\n")
        assert f.clauses == ((1,),)

    @given(formulas())
    @settings(max_examples=200)
    def test_serialize_parse_round_trip(self, formula):
        again = parse_dimacs(serialize_dimacs(formula))
        assert again.num_vars == formula.num_vars
        assert again.clauses == formula.clauses
        expected_tauts = tuple(
            idx
            for idx, cl in enumerate(formula.clauses, 1)
            if any(-l in set(cl) for l in cl)
        )
        assert again.tautologies == expected_tauts


class TestAssignment:
    def test_from_literals_skips_zero_and_sets_polarity(self):
        a = Assignment.from_literals([1, -2, 0, 3])
        assert a.values == {1: True, 2: False, 3: True}

    def test_total_flag(self):
        assert Assignment.from_literals([1, -2], num_vars=2).total
        assert not Assignment.from_literals([1], num_vars=2).total
        assert not Assignment.from_literals([1, -2]).total

    def test_lit_true_and_value_of(self):
        a = Assignment.from_literals([1, -2])
        assert a.lit_true(1) is True
        assert a.lit_true(-1) is False
        assert a.lit_true(-2) is True
        assert a.lit_true(3) is None
        assert a.value_of(2) is False
        assert a.value_of(9) is None


class TestCheckModel:
    def test_agrees_with_truth_table_oracle_on_random_pairs(self):
        rng = random.Random(42)
        for _ in range(500):
            n = rng.randint(1, 8)
            clauses = random_clauses(rng, n, rng.randint(1, 14))
            formula = CnfFormula(num_vars=n, clauses=tuple(clauses))
            assign = random_total_assignment(rng, n)
            verdict = check_model(formula, Assignment(values=assign, total=True))
            assert verdict.satisfied == eval_formula(clauses, assign)
            if not verdict.satisfied:
                assert verdict.failing_clause == first_falsified(clauses, assign)

    def test_reports_lowest_failing_clause(self):
        f = CnfFormula(num_vars=2, clauses=((1,), (-1,), (2,)))
        verdict = check_model(f, Assignment(values={1: False, 2: True}))
        assert not verdict.satisfied
        assert verdict.failing_clause == 1

    def test_lenient_defaults_missing_vars_to_false(self):
        f = CnfFormula(num_vars=2, clauses=((-1, -2),))
        verdict = check_model(f, Assignment(values={1: True}))
        assert verdict.satisfied
        assert verdict.defaulted_vars == (2,)

    def test_default_to_false_can_falsify(self):
        f = CnfFormula(num_vars=2, clauses=((2,),))
        verdict = check_model(f, Assignment(values={1: True}))
        assert not verdict.satisfied
        assert verdict.failing_clause == 1
        assert verdict.defaulted_vars == (2,)

    def test_strict_raises_on_missing_vars(self):
        f = CnfFormula(num_vars=2, clauses=((1, 2),))
        with pytest.raises(IncompleteModel):
            check_model(f, Assignment(values={1: True}), strict=True)

    def test_strict_ignores_vars_absent_from_clauses(self):
        f = CnfFormula(num_vars=5, clauses=((1,),))
        verdict = check_model(f, Assignment(values={1: True}), strict=True)
        assert verdict.satisfied

    def test_empty_clause_never_satisfied(self):
        f = CnfFormula(num_vars=1, clauses=((),))
        verdict = check_model(f, Assignment(values={1: True}))
        assert not verdict.satisfied
        assert verdict.failing_clause == 1


class TestBruteForce:
    @given(formulas(max_vars=7))
    @settings(max_examples=150)
    def test_kind_matches_exhaustive_oracle(self, formula):
        kind, model = brute_force_oracle(formula.num_vars, formula.clauses)
        result = brute_force_solve(formula)
        assert result.kind.value == kind
        if result.kind is ClaimKind.SAT:
            assert result.model is not None and result.model.total
            assert check_model(formula, result.model).satisfied
            assert result.model.values == model

    def test_empty_formula_is_sat(self):
        result = brute_force_solve(CnfFormula(num_vars=0, clauses=()))
        assert result.kind is ClaimKind.SAT

    def test_cap_enforced(self):
        f = CnfFormula(num_vars=30, clauses=((1,),))
        with pytest.raises(TooManyVariables):
            brute_force_solve(f)
        assert brute_force_solve(f, cap=30).kind is ClaimKind.SAT


class TestParseSolverOutput:
    def test_sat_with_model(self):
        out = "c solving\ns SATISFIABLE\nv 1 -2\nv 3 0\n"
        claim = parse_solver_output(out, 10)
        assert claim.kind is ClaimKind.SAT
        assert claim.model is not None
        assert claim.model.values == {1: True, 2: False, 3: True}
        assert claim.raw_exit == 10

    def test_unsat(self):
        claim = parse_solver_output("s UNSATISFIABLE\n", 20)
        assert claim.kind is ClaimKind.UNSAT
        assert claim.model is None

    def test_unknown_without_status(self):
        claim = parse_solver_output("c gave up\n", 0)
        assert claim.kind is ClaimKind.UNKNOWN

    def test_explicit_unknown_status(self):
        claim = parse_solver_output("s UNKNOWN\n", 0)
        assert claim.kind is ClaimKind.UNKNOWN

    def test_sat_requires_exit_10(self):
        with pytest.raises(ConflictingStatus):
            parse_solver_output("s SATISFIABLE\nv 1 0\n", 0)

    def test_unsat_requires_exit_20(self):
        with pytest.raises(ConflictingStatus):
            parse_solver_output("s UNSATISFIABLE\n", 10)

    def test_answer_exit_code_without_status_line(self):
        with pytest.raises(ConflictingStatus):
            parse_solver_output("c quiet\n", 10)
        with pytest.raises(ConflictingStatus):
            parse_solver_output("c quiet\n", 20)

    def test_contradictory_status_lines(self):
        with pytest.raises(ConflictingStatus):
            parse_solver_output("s SATISFIABLE\ns UNSATISFIABLE\n", 10)

    def test_repeated_consistent_status_ok(self):
        claim = parse_solver_output("s UNSATISFIABLE\ns UNSATISFIABLE\n", 20)
        assert claim.kind is ClaimKind.UNSAT

    def test_unrecognized_status_word(self):
        with pytest.raises(ConflictingStatus):
            parse_solver_output("s MAYBE\n", 0)

    def test_sat_without_value_line(self):
        with pytest.raises(MalformedValueLine):
            parse_solver_output("s SATISFIABLE\n", 10)

    def test_sat_with_unterminated_value_line(self):
        with pytest.raises(MalformedValueLine):
            parse_solver_output("s SATISFIABLE\nv 1 2\n", 10)

    def test_non_integer_value_token(self):
        with pytest.raises(MalformedValueLine):
            parse_solver_output("s SATISFIABLE\nv 1 x 0\n", 10)

    def test_value_data_after_terminator_same_line(self):
        with pytest.raises(MalformedValueLine):
            parse_solver_output("s SATISFIABLE\nv 1 0 2\n", 10)

    def test_value_data_after_terminator_next_line(self):
        with pytest.raises(MalformedValueLine):
            parse_solver_output("s SATISFIABLE\nv 1 0\nv 2 0\n", 10)

    def test_contradictory_model_literals(self):
        with pytest.raises(MalformedValueLine):
            parse_solver_output("s SATISFIABLE\nv 1 -1 0\n", 10)

    def test_duplicate_consistent_literals_ok(self):
        claim = parse_solver_output("s SATISFIABLE\nv 1 1 -2 0\n", 10)
        assert claim.model is not None
        assert claim.model.values == {1: True, 2: False}

    def test_model_spread_over_many_lines(self):
        out = "s SATISFIABLE\nv -1\nv 2\nv 0\n"
        claim = parse_solver_output(out, 10)
        assert claim.model is not None
        assert claim.model.values == {1: False, 2: True}

    def test_bytes_input(self):
        claim = parse_solver_output(b"s UNSATISFIABLE\n", 20)
        assert claim.kind is ClaimKind.UNSAT
