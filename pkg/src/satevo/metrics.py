"""Evaluation metrics: PAR scoring, threshold histograms, VBS agreement.

PAR-2 with factor 2 by default (configurable); a solved record contributes
its wall time, an unsolved one contributes factor * timeout. Category scores
partition by the virtual-best-solver truth, not by the candidate's claim, and
a claim contradicting that truth is both flagged and scored as unsolved.
Internally sums are exact (Fraction), so the reconstruction identity
par2_overall * N == par2_sat * N_sat + par2_unsat * N_unsat holds exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .formula import ClaimKind
from .runner import Outcome, RunRecord

THRESHOLDS = (300, 600, 1000, 2000, 3000, 4500)


class MetricsError(Exception):
    pass


class EmptyRecordSet(MetricsError):
    pass


def is_solved(record: RunRecord) -> bool:
    return record.outcome in (Outcome.SOLVED_SAT, Outcome.SOLVED_UNSAT)


def _check_times(records: Sequence[RunRecord], timeout: float) -> None:
    for r in records:
        if is_solved(r) and r.wall_time > timeout:
            raise ValueError(
                f"{r.instance}: solved record wall_time {r.wall_time} exceeds timeout {timeout}"
            )


def par_cost(
    records: Sequence[RunRecord],
    timeout: float,
    factor: float = 2.0,
    force_unsolved: frozenset[str] | set[str] = frozenset(),
) -> Fraction:
    """Exact summed PAR cost. `force_unsolved` demotes flagged instances."""
    penalty = Fraction(factor) * Fraction(timeout)
    total = Fraction(0)
    for r in records:
        if is_solved(r) and r.instance not in force_unsolved:
            total += Fraction(r.wall_time)
        else:
            total += penalty
    return total


def par2(
    records: Sequence[RunRecord],
    timeout: float,
    factor: float = 2.0,
    force_unsolved: frozenset[str] | set[str] = frozenset(),
) -> float:
    """Penalized average runtime over the full record set."""
    if not records:
        raise EmptyRecordSet("PAR score over an empty record set")
    _check_times(records, timeout)
    return float(par_cost(records, timeout, factor, force_unsolved) / len(records))


@dataclass(frozen=True)
class VbsEntry:
    truth: ClaimKind  # SAT or UNSAT
    best_time: Optional[float] = None
    solved_by_any: bool = False


@dataclass(frozen=True)
class VbsTable:
    """Virtual-best-solver reference: per-instance truth and best baseline time.

    File format: `<instance> <SAT|UNSAT> [best_time]` per line; a missing or
    '-' third column means no baseline solved the instance.
    """

    entries: dict[str, VbsEntry] = field(default_factory=dict)

    def truth_of(self, instance: str) -> ClaimKind:
        return self.entries[instance].truth

    @classmethod
    def load(cls, path: str | Path) -> "VbsTable":
        entries: dict[str, VbsEntry] = {}
        p = Path(path)
        for ln, line in enumerate(p.read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2 or parts[1] not in ("SAT", "UNSAT"):
                raise MetricsError(f"{p}: line {ln}: expected '<instance> <SAT|UNSAT> [time]'")
            best: Optional[float] = None
            solved = False
            if len(parts) >= 3 and parts[2] != "-":
                best = float(parts[2])
                solved = True
            entries[parts[0]] = VbsEntry(truth=ClaimKind(parts[1]), best_time=best, solved_by_any=solved)
        if not entries:
            raise MetricsError(f"{p}: empty VBS table")
        return cls(entries=entries)

    def save(self, path: str | Path) -> None:
        lines = []
        for name in sorted(self.entries):
            e = self.entries[name]
            col3 = "-" if e.best_time is None else repr(e.best_time)
            lines.append(f"{name} {e.truth.value} {col3}")
        Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class Mismatch:
    instance: str
    claimed: ClaimKind
    truth: ClaimKind


@dataclass(frozen=True)
class VbsComparison:
    matches: int
    mismatches: tuple[Mismatch, ...]
    additionally_solved: tuple[str, ...]


def _require_coverage(records: Sequence[RunRecord], vbs: VbsTable) -> None:
    missing = [r.instance for r in records if r.instance not in vbs.entries]
    if missing:
        raise MetricsError(f"VBS table missing instance(s): {', '.join(sorted(missing)[:5])}")


def vbs_compare(records: Sequence[RunRecord], vbs: VbsTable) -> VbsComparison:
    """Matches, truth-contradicting claims, and instances no baseline solved."""
    _require_coverage(records, vbs)
    matches = 0
    mismatches = []
    additional = []
    claim_of = {Outcome.SOLVED_SAT: ClaimKind.SAT, Outcome.SOLVED_UNSAT: ClaimKind.UNSAT}
    for r in records:
        kind = claim_of.get(r.outcome)
        if kind is None:
            continue
        entry = vbs.entries[r.instance]
        if kind is entry.truth:
            matches += 1
            if not entry.solved_by_any:
                additional.append(r.instance)
        else:
            mismatches.append(Mismatch(instance=r.instance, claimed=kind, truth=entry.truth))
    return VbsComparison(
        matches=matches,
        mismatches=tuple(sorted(mismatches, key=lambda m: m.instance)),
        additionally_solved=tuple(sorted(additional)),
    )


def category_par2(
    records: Sequence[RunRecord],
    vbs: VbsTable,
    timeout: float,
    factor: float = 2.0,
) -> tuple[Optional[float], Optional[float]]:
    """(PAR on SAT partition, PAR on UNSAT partition) by VBS truth.

    An empty partition is reported absent (None), never as zero. Mismatched
    claims count as unsolved inside their partition.
    """
    _require_coverage(records, vbs)
    flagged = {m.instance for m in vbs_compare(records, vbs).mismatches}
    sat = [r for r in records if vbs.truth_of(r.instance) is ClaimKind.SAT]
    unsat = [r for r in records if vbs.truth_of(r.instance) is ClaimKind.UNSAT]
    par_sat = par2(sat, timeout, factor, flagged) if sat else None
    par_unsat = par2(unsat, timeout, factor, flagged) if unsat else None
    return par_sat, par_unsat


def threshold_histogram(records: Sequence[RunRecord]) -> dict[int, int]:
    """Cumulative solved counts at the fixed report thresholds."""
    counts = {}
    for thr in THRESHOLDS:
        counts[thr] = sum(1 for r in records if is_solved(r) and r.wall_time <= thr)
    return counts


@dataclass(frozen=True)
class EvaluationReport:
    suite_size: int
    solved_sat: int
    solved_unsat: int
    unsolved: int
    par2_overall: float
    par2_sat: Optional[float]
    par2_unsat: Optional[float]
    threshold_counts: dict[int, int]
    vbs_matches: int
    vbs_mismatches: tuple[Mismatch, ...]
    additionally_solved: tuple[str, ...]
    mem_mean: Optional[float]  # bytes over records with sampling data
    mem_max: Optional[int]
    mem_coverage: float  # fraction of records with a memory sample
    timeout_used: float
    par_factor: float

    @property
    def solved(self) -> int:
        return self.solved_sat + self.solved_unsat

    def to_json_dict(self) -> dict:
        return {
            "suite_size": self.suite_size,
            "solved_sat": self.solved_sat,
            "solved_unsat": self.solved_unsat,
            "solved": self.solved,
            "unsolved": self.unsolved,
            "par2_overall": self.par2_overall,
            "par2_sat": self.par2_sat,
            "par2_unsat": self.par2_unsat,
            "threshold_counts": {str(k): v for k, v in sorted(self.threshold_counts.items())},
            "vbs_matches": self.vbs_matches,
            "vbs_mismatches": [
                {"instance": m.instance, "claimed": m.claimed.value, "truth": m.truth.value}
                for m in self.vbs_mismatches
            ],
            "additionally_solved": list(self.additionally_solved),
            "mem_mean_bytes": self.mem_mean,
            "mem_max_bytes": self.mem_max,
            "mem_coverage": self.mem_coverage,
            "timeout_used": self.timeout_used,
            "par_factor": self.par_factor,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        """Readable scoreboard, one metric per line."""
        def val(x: Optional[float]) -> str:
            return "n/a" if x is None else f"{x:.4f}"

        lines = [
            f"instances        {self.suite_size}",
            f"solved           {self.solved} (SAT {self.solved_sat}, UNSAT {self.solved_unsat})",
            f"unsolved         {self.unsolved}",
            f"PAR-{self.par_factor:g} overall   {val(self.par2_overall)}",
            f"PAR-{self.par_factor:g} SAT       {val(self.par2_sat)}",
            f"PAR-{self.par_factor:g} UNSAT     {val(self.par2_unsat)}",
            "solved within    "
            + "  ".join(f"{k}s:{v}" for k, v in sorted(self.threshold_counts.items())),
            f"vs best known    {self.vbs_matches} agree, {len(self.vbs_mismatches)} contradict",
        ]
        if self.vbs_mismatches:
            for m in self.vbs_mismatches:
                lines.append(f"  MISMATCH {m.instance}: claimed {m.claimed.value}, truth {m.truth.value}")
        if self.additionally_solved:
            lines.append(
                f"newly solved     {len(self.additionally_solved)}: "
                + ", ".join(self.additionally_solved[:6])
                + (" ..." if len(self.additionally_solved) > 6 else "")
            )
        if self.mem_mean is not None:
            lines.append(
                f"memory           mean {self.mem_mean / 1e6:.1f} MB, max "
                f"{(self.mem_max or 0) / 1e6:.1f} MB over {self.mem_coverage:.0%} of runs"
            )
        return "\n".join(lines)

    @classmethod
    def from_json_dict(cls, d: dict) -> "EvaluationReport":
        return cls(
            suite_size=d["suite_size"],
            solved_sat=d["solved_sat"],
            solved_unsat=d["solved_unsat"],
            unsolved=d["unsolved"],
            par2_overall=d["par2_overall"],
            par2_sat=d["par2_sat"],
            par2_unsat=d["par2_unsat"],
            threshold_counts={int(k): v for k, v in d["threshold_counts"].items()},
            vbs_matches=d["vbs_matches"],
            vbs_mismatches=tuple(
                Mismatch(m["instance"], ClaimKind(m["claimed"]), ClaimKind(m["truth"]))
                for m in d["vbs_mismatches"]
            ),
            additionally_solved=tuple(d["additionally_solved"]),
            mem_mean=d["mem_mean_bytes"],
            mem_max=d["mem_max_bytes"],
            mem_coverage=d["mem_coverage"],
            timeout_used=d["timeout_used"],
            par_factor=d["par_factor"],
        )

    def to_markdown(self) -> str:
        gb = 1024 ** 3
        mm = "n/a" if self.mem_mean is None else f"{self.mem_mean / gb:.3f} GB"
        mx = "n/a" if self.mem_max is None else f"{self.mem_max / gb:.3f} GB"
        ps = "absent" if self.par2_sat is None else f"{self.par2_sat:.2f}"
        pu = "absent" if self.par2_unsat is None else f"{self.par2_unsat:.2f}"
        lines = [
            "## Evaluation report",
            "",
            f"- solved: {self.solved} / {self.suite_size} (SAT {self.solved_sat}, UNSAT {self.solved_unsat})",
            f"- PAR-{self.par_factor:g} overall: {self.par2_overall:.2f} (SAT {ps}, UNSAT {pu})",
            "- solved within: "
            + ", ".join(f"{t}s: {self.threshold_counts[t]}" for t in THRESHOLDS),
            f"- VBS matches: {self.vbs_matches}, mismatches: {len(self.vbs_mismatches)}, "
            f"additionally solved: {len(self.additionally_solved)}",
            f"- memory: mean {mm}, max {mx} (coverage {self.mem_coverage:.0%})",
            f"- timeout: {self.timeout_used:g}s",
        ]
        if self.vbs_mismatches:
            lines.append("- mismatched claims: " + ", ".join(
                f"{m.instance} (claimed {m.claimed.value}, truth {m.truth.value})"
                for m in self.vbs_mismatches
            ))
        return "\n".join(lines) + "\n"


def build_report(
    records: Sequence[RunRecord],
    vbs: VbsTable,
    timeout: float,
    par_factor: float = 2.0,
) -> EvaluationReport:
    """Full metric sweep. Identical records yield a byte-identical JSON report."""
    if not records:
        raise EmptyRecordSet("cannot report on an empty record set")
    _require_coverage(records, vbs)
    comparison = vbs_compare(records, vbs)
    flagged = {m.instance for m in comparison.mismatches}

    solved_sat = sum(
        1 for r in records if r.outcome is Outcome.SOLVED_SAT and r.instance not in flagged
    )
    solved_unsat = sum(
        1 for r in records if r.outcome is Outcome.SOLVED_UNSAT and r.instance not in flagged
    )
    overall = par2(records, timeout, par_factor, flagged)
    p_sat, p_unsat = category_par2(records, vbs, timeout, par_factor)

    mems = [r.peak_mem for r in records if r.peak_mem is not None]
    return EvaluationReport(
        suite_size=len(records),
        solved_sat=solved_sat,
        solved_unsat=solved_unsat,
        unsolved=len(records) - solved_sat - solved_unsat,
        par2_overall=overall,
        par2_sat=p_sat,
        par2_unsat=p_unsat,
        # Flagged (mismatched) records are unsolved for every headline number.
        threshold_counts=threshold_histogram([r for r in records if r.instance not in flagged]),
        vbs_matches=comparison.matches,
        vbs_mismatches=comparison.mismatches,
        additionally_solved=comparison.additionally_solved,
        mem_mean=(sum(mems) / len(mems)) if mems else None,
        mem_max=max(mems) if mems else None,
        mem_coverage=len(mems) / len(records),
        timeout_used=timeout,
        par_factor=par_factor,
    )


def cactus_points(records: Sequence[RunRecord]) -> list[tuple[float, int]]:
    """(wall_time, cumulative solved) points for a cactus plot, time-sorted."""
    times = sorted(r.wall_time for r in records if is_solved(r))
    return [(t, i + 1) for i, t in enumerate(times)]
