#!/usr/bin/env python3
"""Generate benchmark instances with known truth into a directory.

Usage:
    python scripts/make_benchmark_suite.py OUT_DIR [--family all] [--seed 42]

Families:
    planted   satisfiable 3-SAT with a planted assignment, n = 20..200
    parity    unsatisfiable XOR-chain contradictions, n = 6..17
    php       pigeonhole principle, 4..7 holes
    all       everything above

Writes OUT_DIR/<name>.cnf plus OUT_DIR/truth.txt mapping each instance to
SAT or UNSAT. The truth is by construction, cross-checked with the
in-process CDCL solver where it finishes within budget.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from satevo.formula import ClaimKind, serialize_dimacs
from satevo.refsolver import solve_formula
from satevo.suites import parity_contradiction, pigeonhole, planted_ksat, save_truth_table


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir")
    ap.add_argument("--family", choices=("planted", "parity", "php", "all"), default="all")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--crosscheck-budget", type=int, default=100_000,
                    help="CDCL decision budget for verification (0 disables)")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    items: list[tuple[str, object, ClaimKind]] = []

    if args.family in ("planted", "all"):
        for n in (20, 40, 60, 80, 100, 140, 200):
            rng = random.Random(args.seed * 10_000 + n)
            items.append((f"planted{n:03d}", planted_ksat(rng, n, round(n * 4.2)), ClaimKind.SAT))
    if args.family in ("parity", "all"):
        for n in (6, 8, 10, 12, 14, 16, 17):
            items.append((f"parity{n:02d}", parity_contradiction(n), ClaimKind.UNSAT))
    if args.family in ("php", "all"):
        for h in (4, 5, 6, 7):
            items.append((f"php{h}", pigeonhole(h), ClaimKind.UNSAT))

    truth: dict[str, ClaimKind] = {}
    for name, formula, expected in items:
        if args.crosscheck_budget:
            res = solve_formula(formula, decision_budget=args.crosscheck_budget)
            if res.kind is not ClaimKind.UNKNOWN and res.kind is not expected:
                print(f"CONSTRUCTION BUG: {name} expected {expected.value}, "
                      f"solver says {res.kind.value}", file=sys.stderr)
                return 1
        (out / f"{name}.cnf").write_text(serialize_dimacs(formula))
        truth[f"{name}.cnf"] = expected
        print(f"{name}.cnf {expected.value}", file=sys.stderr)

    save_truth_table(out / "truth.txt", truth)
    print(f"{len(truth)} instances under {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
