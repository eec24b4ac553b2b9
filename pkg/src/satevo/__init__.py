"""SAT solver evolution harness.

A champion/challenger loop for evolving a DIMACS solver under hard
correctness gates: every candidate is layout-checked, compliance-scanned
against a self-growing rulebase, built, smoke-tested, validated (models
re-checked, DRAT refutations re-verified), benchmarked under PAR scoring,
and only then compared against the incumbent. The package also bundles
the pieces separately: a CNF parser and model checker, a forward DRAT
checker, a reference CDCL solver, suite generators, a parallel benchmark
runner, and the metric suite.
"""

from __future__ import annotations

from .formula import (
    Assignment,
    ClaimKind,
    CnfFormula,
    FormulaError,
    ModelCheck,
    SolverClaim,
    brute_force_solve,
    check_model,
    parse_dimacs,
    parse_dimacs_file,
    parse_solver_output,
    serialize_dimacs,
)
from .drat import (
    DratProof,
    ProofError,
    ProofVerdict,
    check_proof,
    check_proof_file,
    parse_drat,
    parse_drat_file,
)
from .refsolver import solve_formula
from .runner import (
    Outcome,
    ResourceLimits,
    RunRecord,
    load_records_jsonl,
    pair_run,
    run_benchmark,
    run_instance,
    save_records_jsonl,
)
from .metrics import (
    EvaluationReport,
    MetricsError,
    VbsEntry,
    VbsTable,
    build_report,
    cactus_points,
    par2,
    vbs_compare,
)
from .suites import (
    SuiteError,
    generate_smoke_suite,
    generate_validation_suite,
    load_truth_table,
    parity_contradiction,
    pigeonhole,
    planted_ksat,
    random_ksat,
    save_truth_table,
)
from .workspace import (
    BuildResult,
    LayoutReport,
    SolverVariant,
    WorkspaceError,
    build_variant,
    clone_variant,
    record_lineage,
    validate_layout,
)
from .fixture import (
    MUTANTS,
    apply_mutant,
    materialize_toy_solver,
    mutant_names,
    mutant_source,
    set_decision_budget,
)
from .rules import (
    ComplianceReport,
    FailureSignature,
    RuleError,
    RulePatch,
    RuleSet,
    analyze_failures,
    compliance_check,
    evolve_rules,
    load_rules,
    restore_snapshot,
    snapshot_rules,
    write_seed_rules,
)
from .gates import (
    FeedbackDocument,
    GateError,
    GateVerdict,
    craft_feedback,
    load_suite,
    stage1_smoke,
    stage2_validate,
)
from .agents import (
    AgentContext,
    AgentError,
    AgentPatchSet,
    HttpBackend,
    ScriptedBackend,
    apply_patchset,
    build_manifest,
)
from .evolution import (
    CycleRecord,
    Decision,
    EvolutionConfig,
    EvolutionError,
    EvolutionResult,
    Objective,
    run_evolution,
)
from .demo import ScenarioError, ScenarioPaths, build_scenario

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
