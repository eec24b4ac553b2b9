"""Generated CNF suites with recorded ground truth.

The shipped smoke/validation suites are synthesized (random k-SAT around the
solubility threshold plus crafted unit-propagation, pure-literal and
contradiction cases) because competition benchmark sets are not
redistributable here. Every suite directory carries a truth.txt table of
`<instance> <SAT|UNSAT>` lines; that table is authoritative for gating.
"""

from __future__ import annotations

import random
from pathlib import Path

from .formula import (
    Assignment,
    ClaimKind,
    CnfFormula,
    brute_force_solve,
    serialize_dimacs,
)

TRUTH_FILENAME = "truth.txt"


class SuiteError(Exception):
    pass


class SuiteMissing(SuiteError):
    pass


def random_ksat(rng: random.Random, num_vars: int, num_clauses: int, k: int = 3) -> CnfFormula:
    """Uniform random k-SAT; clauses never repeat a variable (no tautologies)."""
    k = min(k, num_vars)
    clauses = []
    for _ in range(num_clauses):
        vars_ = rng.sample(range(1, num_vars + 1), k)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vars_))
    return CnfFormula(num_vars=num_vars, clauses=tuple(clauses))


def planted_ksat(rng: random.Random, num_vars: int, num_clauses: int, k: int = 3) -> CnfFormula:
    """Random k-SAT guaranteed satisfiable by a hidden planted assignment."""
    hidden = {v: rng.random() < 0.5 for v in range(1, num_vars + 1)}
    k = min(k, num_vars)
    clauses = []
    for _ in range(num_clauses):
        while True:
            vars_ = rng.sample(range(1, num_vars + 1), k)
            lits = tuple(v if rng.random() < 0.5 else -v for v in vars_)
            if any(hidden[abs(l)] == (l > 0) for l in lits):
                clauses.append(lits)
                break
    return CnfFormula(num_vars=num_vars, clauses=tuple(clauses))


def unit_chain(n: int) -> CnfFormula:
    """(x1) (-x1 v x2) ... (-x_{n-1} v x_n): pure unit propagation, SAT."""
    clauses = [(1,)] + [(-i, i + 1) for i in range(1, n)]
    return CnfFormula(num_vars=n, clauses=tuple(clauses))


def contradiction_chain(n: int) -> CnfFormula:
    """Unit chain plus (-x_n): propagates to a conflict, UNSAT."""
    base = unit_chain(n)
    return CnfFormula(num_vars=n, clauses=base.clauses + ((-n,),))


def pure_literal(n: int) -> CnfFormula:
    """Every clause contains x1 positively: SAT via a pure literal."""
    clauses = [(1, i) for i in range(2, n + 1)] + [(1, -i) for i in range(2, n + 1)]
    return CnfFormula(num_vars=n, clauses=tuple(clauses))


def pigeonhole(holes: int) -> CnfFormula:
    """PHP(holes+1, holes): unsatisfiable by construction. Var p_{i,j} = pigeon i in hole j."""
    pigeons = holes + 1

    def var(i: int, j: int) -> int:
        return i * holes + j + 1

    clauses = []
    for i in range(pigeons):
        clauses.append(tuple(var(i, j) for j in range(holes)))
    for j in range(holes):
        for i1 in range(pigeons):
            for i2 in range(i1 + 1, pigeons):
                clauses.append((-var(i1, j), -var(i2, j)))
    return CnfFormula(num_vars=pigeons * holes, clauses=tuple(clauses))


def parity_contradiction(n: int, rng: random.Random | None = None) -> CnfFormula:
    """Two Tseitin-encoded parity chains over shared inputs, forced to disagree.

    Chain variables c_i and d_i both accumulate x1 xor ... xor x_{i+1}; the
    final units assert c true and d false, so the formula is unsatisfiable by
    construction. Chronological solvers without strong learning need roughly
    2^n decisions, which makes n a convenient difficulty dial. An optional rng
    shuffles clause order so instances of equal n are not byte-identical.
    """
    if n < 2:
        raise ValueError("need at least two inputs")
    x = list(range(1, n + 1))
    nxt = n + 1

    def fresh() -> int:
        nonlocal nxt
        v = nxt
        nxt += 1
        return v

    clauses: list[tuple[int, ...]] = []

    def xor_gate(a: int, b: int) -> int:
        # c <-> a xor b, four clauses
        c = fresh()
        clauses.extend([(-a, -b, -c), (a, b, -c), (a, -b, c), (-a, b, c)])
        return c

    def chain() -> int:
        acc = x[0]
        for v in x[1:]:
            acc = xor_gate(acc, v)
        return acc

    c_out = chain()
    d_out = chain()
    clauses.append((c_out,))
    clauses.append((-d_out,))
    if rng is not None:
        rng.shuffle(clauses)
    return CnfFormula(num_vars=nxt - 1, clauses=tuple(clauses))


def save_truth_table(path: str | Path, entries: dict[str, ClaimKind]) -> None:
    lines = [f"{name} {kind.value}" for name, kind in sorted(entries.items())]
    Path(path).write_text("\n".join(lines) + "\n")


def load_truth_table(path: str | Path) -> dict[str, ClaimKind]:
    p = Path(path)
    if not p.is_file():
        raise SuiteMissing(f"no truth table at {p}")
    entries: dict[str, ClaimKind] = {}
    for ln, line in enumerate(p.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2 or parts[1] not in ("SAT", "UNSAT"):
            raise SuiteError(f"{p}: line {ln}: expected '<instance> <SAT|UNSAT>'")
        entries[parts[0]] = ClaimKind(parts[1])
    if not entries:
        raise SuiteMissing(f"{p}: empty truth table")
    return entries


def _write_instance(out_dir: Path, name: str, formula: CnfFormula) -> None:
    (out_dir / name).write_text(serialize_dimacs(formula))


def generate_smoke_suite(
    out_dir: str | Path, count: int = 115, seed: int = 7, max_vars: int = 10
) -> Path:
    """Small, fast instances with brute-force ground truth.

    Mix of crafted cases (unit chains, contradictions, pure literals, tiny
    pigeonhole) and random 3-SAT spanning the SAT/UNSAT ratio range. Returns
    the suite directory.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    truth: dict[str, ClaimKind] = {}

    crafted: list[tuple[str, CnfFormula, ClaimKind]] = [
        ("unit_chain", unit_chain(max_vars), ClaimKind.SAT),
        ("contradiction", contradiction_chain(max_vars), ClaimKind.UNSAT),
        ("pure_literal", pure_literal(max_vars), ClaimKind.SAT),
        ("php3", pigeonhole(3), ClaimKind.UNSAT),
        ("empty", CnfFormula(num_vars=2, clauses=()), ClaimKind.SAT),
        ("direct_conflict", CnfFormula(num_vars=2, clauses=((1,), (-1,))), ClaimKind.UNSAT),
    ]
    idx = 0
    for tag, formula, kind in crafted:
        if idx >= count:
            break
        name = f"{idx:03d}_{tag}.cnf"
        _write_instance(out, name, formula)
        truth[name] = kind
        idx += 1

    while idx < count:
        n = rng.randint(4, max_vars)
        ratio = rng.uniform(2.5, 6.5)
        formula = random_ksat(rng, n, max(1, int(n * ratio)))
        kind = brute_force_solve(formula).kind
        name = f"{idx:03d}_rnd3_v{n}.cnf"
        _write_instance(out, name, formula)
        truth[name] = kind
        idx += 1

    save_truth_table(out / TRUTH_FILENAME, truth)
    return out


def generate_validation_suite(
    out_dir: str | Path, count: int = 50, seed: int = 11, max_vars: int = 20
) -> Path:
    """Correctness-validation instances (default 50, up to max_vars variables).

    Satisfiable instances above the cheap brute-force range are planted; the
    unsatisfiable ones stay small enough to verify exhaustively or come from
    the pigeonhole family.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    truth: dict[str, ClaimKind] = {}

    idx = 0
    while idx < count:
        roll = idx % 4
        if roll == 0:
            n = rng.randint(10, max_vars)
            formula = planted_ksat(rng, n, int(n * 4.0))
            kind = ClaimKind.SAT
            tag = f"planted_v{n}"
        elif roll == 1:
            n = rng.randint(6, 12)
            formula = random_ksat(rng, n, int(n * rng.uniform(5.0, 7.0)))
            kind = brute_force_solve(formula).kind
            tag = f"dense_v{n}"
        elif roll == 2:
            n = rng.randint(6, min(14, max_vars))
            formula = random_ksat(rng, n, int(n * rng.uniform(3.0, 4.8)))
            kind = brute_force_solve(formula).kind
            tag = f"thresh_v{n}"
        else:
            holes = rng.randint(2, 3)
            formula = pigeonhole(holes)
            kind = ClaimKind.UNSAT
            tag = f"php{holes}"
        name = f"{idx:03d}_{tag}.cnf"
        _write_instance(out, name, formula)
        truth[name] = kind
        idx += 1

    save_truth_table(out / TRUTH_FILENAME, truth)
    return out


def generate_unsat_pool(
    rng: random.Random, count: int, var_range: tuple[int, int] = (6, 12)
) -> list[CnfFormula]:
    """Random UNSAT instances (brute-force filtered) plus pigeonhole seasoning."""
    pool: list[CnfFormula] = []
    holes = 2
    while len(pool) < count:
        if len(pool) % 25 == 24 and holes <= 3:
            pool.append(pigeonhole(holes))  # 16-var PHP(4,3) at holes=3
            holes += 1
            continue
        n = rng.randint(*var_range)
        formula = random_ksat(rng, n, int(n * rng.uniform(5.5, 8.0)))
        if brute_force_solve(formula).kind is ClaimKind.UNSAT:
            pool.append(formula)
    return pool
