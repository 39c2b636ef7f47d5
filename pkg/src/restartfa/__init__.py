"""Exact and statistical simulation workbench for quantum and probabilistic
finite automata with restart and reset moves."""

from .closure import (
    DecisionReport,
    GapProfile,
    decide,
    error_verdict,
    expected_runtime_bound,
    gap_profile,
    overall_decision,
    words_up_to,
)
from .engine import EngineCaps, RoundResult, round_table, run_round, run_round_oneway, run_round_twoway
from .linalg import (
    PartialMatrix,
    complete_unitary,
    embed_stochastic,
    is_row_stochastic,
    is_unitary,
    psd_principal_sqrt,
)
from .machine import (
    CENT,
    DOLLAR,
    MachineSpec,
    StateRoles,
    TapeWord,
    as_twoway,
    induced_step_operator,
    load_machine,
    save_machine,
    tape_word,
    validate_machine,
)
from .montecarlo import SampleStats, sample_runs
from .qcfa import QcfaSpec, lift_reset_to_qcfa, qcfa_decision, run_qcfa, validate_qcfa
from .reports import ReportRow, evaluate_words, export_report
from .zoo import (
    GapBound,
    LanguageId,
    amplify_reset,
    build_am_pfa,
    build_am_qfa,
    build_bm,
    build_cm,
    build_leq_pfa,
    build_leq_qfa,
    build_pal,
    chain_one_sided,
    majority_copies,
    membership,
    pfa_to_qfa_restart,
    restart_to_twoway,
    swap_accept_reject,
    wrap_constant,
    wrap_exponential,
)

__version__ = "0.1.0"
