#!/usr/bin/env python3
"""Build the demonstration scenario and run the ten-cycle loop end to end.

Usage:
    python scripts/run_demo_evolution.py [DEST] [--cycles N] [--keep]

DEST defaults to a fresh temporary directory. The script prints the
trajectory, the final champion's scoreboard, and the evolved rule
versions, then removes DEST unless --keep (or an explicit DEST) is given.
A second run over the same scenario produces a byte-identical trajectory;
pass --verify-replay to do both runs and compare.
"""

from __future__ import annotations

import argparse
import shutil
import sys
import tempfile
import time
from pathlib import Path

from satevo.demo import build_scenario
from satevo.evolution import EvolutionConfig, run_evolution
from satevo.metrics import EvaluationReport


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dest", nargs="?", help="scenario directory (kept if given)")
    ap.add_argument("--cycles", type=int, default=10)
    ap.add_argument("--keep", action="store_true", help="keep a temporary DEST")
    ap.add_argument(
        "--verify-replay",
        action="store_true",
        help="run twice and require byte-identical trajectories",
    )
    args = ap.parse_args()

    keep = args.keep or args.dest is not None
    dest = Path(args.dest) if args.dest else Path(tempfile.mkdtemp(prefix="satevo_demo_"))

    try:
        t0 = time.time()
        paths = build_scenario(dest)
        print(f"scenario built in {time.time() - t0:.1f}s under {paths.root}", file=sys.stderr)

        config = EvolutionConfig.from_json(paths.config_file)
        t0 = time.time()
        result = run_evolution(config, args.cycles)
        print(f"{args.cycles} cycles in {time.time() - t0:.1f}s", file=sys.stderr)

        print(Path(result.trajectory_path).read_text().rstrip())
        print()
        print(f"champion: {result.champion.variant.id}")
        if result.champion.report is not None:
            report = result.champion.report
            if isinstance(report, EvaluationReport):
                print(report.to_text())

        rules_dir = config.work_dir / "rules"
        versions = []
        for f in sorted(rules_dir.glob("0*.md")):
            text = f.read_text()
            ver = text.split("rule-version: ", 1)[1].split(" ", 1)[0] if "rule-version: " in text else "?"
            versions.append(f"{f.name} v{ver}")
        print("\nrulebase: " + ", ".join(versions))

        if args.verify_replay:
            first = Path(result.trajectory_path).read_bytes()
            shutil.rmtree(config.work_dir)
            rerun = run_evolution(EvolutionConfig.from_json(paths.config_file), args.cycles)
            second = Path(rerun.trajectory_path).read_bytes()
            if first != second:
                print("REPLAY MISMATCH: trajectories differ between runs", file=sys.stderr)
                return 1
            print("\nreplay verified: trajectories byte-identical")
        return 0
    finally:
        if not keep:
            shutil.rmtree(dest, ignore_errors=True)


if __name__ == "__main__":
    sys.exit(main())
