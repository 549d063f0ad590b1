"""Undesired-LRS fault injection, built-in diagnosis and two-cycle mitigation."""
from .campaign import (MITIGATIONS, SCHEMA_VERSION, CoverageReport, FaultTarget,
                       ProbabilityEstimate, TrialRecord, binomial_sigma, consecutive_fault_prob,
                       coverage_mc, fame_style_array, fault_free_mc, fault_free_prob, run_trial,
                       wilson)
from .diagnosis import DiagnosisResult, diagnose, locate_faults, screen_column
from .mitigation import (MitigationError, MitigationPlan, SatoPreconditionError, SliceLayout,
                         activity_report, apply_ftg, apply_ftv, apply_plan, apply_sato,
                         forced_levels, golden_outputs, plan_forcing, plan_ftg, plan_ftv,
                         plan_sato, readout_order, remapped_levels, slice_periodicity,
                         unfixable_witness)
from .model import (FaultError, FaultMap, YieldModel, dumps_faults, effective_matrix,
                    inject_count, inject_random, loads_faults, trial_rng)

__all__ = [
    "MITIGATIONS", "SCHEMA_VERSION", "CoverageReport", "FaultTarget", "ProbabilityEstimate",
    "TrialRecord", "binomial_sigma", "consecutive_fault_prob", "coverage_mc", "fame_style_array",
    "fault_free_mc", "fault_free_prob", "run_trial", "wilson", "DiagnosisResult", "diagnose",
    "locate_faults", "screen_column", "MitigationError", "MitigationPlan",
    "SatoPreconditionError", "SliceLayout", "activity_report", "apply_ftg", "apply_ftv",
    "apply_plan", "apply_sato", "forced_levels", "golden_outputs", "plan_forcing", "plan_ftg",
    "plan_ftv", "plan_sato", "readout_order", "remapped_levels", "slice_periodicity",
    "unfixable_witness", "FaultError", "FaultMap", "YieldModel", "dumps_faults",
    "effective_matrix", "inject_count", "inject_random", "loads_faults", "trial_rng",
]
