"""Generated benchmark suites: construction guarantees and truth tables."""

from __future__ import annotations

import random

import pytest

from helpers import brute_force_oracle, count_models
from satevo.formula import ClaimKind, brute_force_solve, parse_dimacs_file
from satevo.suites import (
    SuiteError,
    SuiteMissing,
    TRUTH_FILENAME,
    contradiction_chain,
    generate_smoke_suite,
    generate_unsat_pool,
    generate_validation_suite,
    load_truth_table,
    parity_contradiction,
    pigeonhole,
    planted_ksat,
    pure_literal,
    random_ksat,
    save_truth_table,
    unit_chain,
)


class TestFamilies:
    def test_unit_chain_has_one_model(self):
        f = unit_chain(6)
        assert brute_force_oracle(f.num_vars, f.clauses)[0] == "SAT"
        assert count_models(f.num_vars, f.clauses) == 1

    def test_contradiction_chain_unsat(self):
        f = contradiction_chain(6)
        assert brute_force_oracle(f.num_vars, f.clauses)[0] == "UNSAT"

    def test_pure_literal_sat(self):
        f = pure_literal(7)
        assert brute_force_oracle(f.num_vars, f.clauses)[0] == "SAT"

    @pytest.mark.parametrize("holes", [2, 3])
    def test_pigeonhole_unsat(self, holes):
        f = pigeonhole(holes)
        assert f.num_vars == (holes + 1) * holes
        assert brute_force_oracle(f.num_vars, f.clauses)[0] == "UNSAT"

    @pytest.mark.parametrize("n", [2, 3, 5, 6])
    def test_parity_contradiction_unsat(self, n):
        f = parity_contradiction(n)
        assert brute_force_oracle(f.num_vars, f.clauses)[0] == "UNSAT"

    def test_parity_contradiction_shuffle_changes_order_not_truth(self):
        plain = parity_contradiction(5)
        shuffled = parity_contradiction(5, rng=random.Random(3))
        assert sorted(plain.clauses) == sorted(shuffled.clauses)
        assert plain.clauses != shuffled.clauses
        assert brute_force_oracle(shuffled.num_vars, shuffled.clauses)[0] == "UNSAT"

    def test_parity_contradiction_rejects_tiny_n(self):
        with pytest.raises(ValueError):
            parity_contradiction(1)

    def test_planted_ksat_is_sat(self):
        rng = random.Random(8)
        for _ in range(20):
            f = planted_ksat(rng, 9, 36)
            assert brute_force_oracle(f.num_vars, f.clauses)[0] == "SAT"

    def test_random_ksat_shape(self):
        rng = random.Random(1)
        f = random_ksat(rng, 10, 42)
        assert f.num_vars == 10
        assert f.num_clauses == 42
        assert all(len(set(abs(l) for l in cl)) == len(cl) == 3 for cl in f.clauses)


class TestTruthTable:
    def test_round_trip(self, tmp_path):
        table = {"a.cnf": ClaimKind.SAT, "b.cnf": ClaimKind.UNSAT}
        path = tmp_path / "truth.txt"
        save_truth_table(path, table)
        assert load_truth_table(path) == table

    def test_comments_and_blanks_tolerated(self, tmp_path):
        path = tmp_path / "truth.txt"
        path.write_text("# header\n\na.cnf SAT\n")
        assert load_truth_table(path) == {"a.cnf": ClaimKind.SAT}

    def test_missing_file(self, tmp_path):
        with pytest.raises(SuiteMissing):
            load_truth_table(tmp_path / "nope.txt")

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "truth.txt"
        path.write_text("a.cnf MAYBE\n")
        with pytest.raises(SuiteError):
            load_truth_table(path)

    def test_empty_table(self, tmp_path):
        path = tmp_path / "truth.txt"
        path.write_text("# nothing\n")
        with pytest.raises(SuiteMissing):
            load_truth_table(path)


class TestGeneratedSuites:
    def test_smoke_suite_instances_match_recorded_truth(self, smoke_dir):
        truth = load_truth_table(smoke_dir / TRUTH_FILENAME)
        cnfs = sorted(p.name for p in smoke_dir.glob("*.cnf"))
        assert len(cnfs) == 40
        assert set(truth) == set(cnfs)
        for name, kind in truth.items():
            formula = parse_dimacs_file(smoke_dir / name)
            assert brute_force_solve(formula).kind is kind, name

    def test_validation_suite_instances_match_recorded_truth(self, validation_dir):
        truth = load_truth_table(validation_dir / TRUTH_FILENAME)
        assert len(truth) == 24
        for name, kind in truth.items():
            formula = parse_dimacs_file(validation_dir / name)
            assert brute_force_solve(formula).kind is kind, name

    def test_validation_suite_has_both_kinds(self, validation_dir):
        kinds = set(load_truth_table(validation_dir / TRUTH_FILENAME).values())
        assert kinds == {ClaimKind.SAT, ClaimKind.UNSAT}

    def test_generation_is_deterministic(self, tmp_path):
        a = generate_smoke_suite(tmp_path / "a", count=12, seed=3, max_vars=6)
        b = generate_smoke_suite(tmp_path / "b", count=12, seed=3, max_vars=6)
        for p in sorted(a.glob("*")):
            assert (b / p.name).read_bytes() == p.read_bytes()

    def test_different_seeds_differ(self, tmp_path):
        a = generate_validation_suite(tmp_path / "a", count=8, seed=1, max_vars=12)
        b = generate_validation_suite(tmp_path / "b", count=8, seed=2, max_vars=12)
        assert any(
            (a / p.name).read_bytes() != (b / p.name).read_bytes()
            for p in sorted(a.glob("*.cnf"))
        )


class TestUnsatPool:
    def test_all_members_unsat(self):
        pool = generate_unsat_pool(random.Random(4), 30, var_range=(5, 9))
        assert len(pool) == 30
        for formula in pool:
            assert brute_force_oracle(formula.num_vars, formula.clauses)[0] == "UNSAT"
