"""sarbias: testing-strategy bias in VE-against-SAR estimates.

The package pairs exact closed-form estimands with a ground-truth
transmission-unit simulator, an observation layer that degrades the truth
into retrospective test records, and naive estimators replicating
published study designs, so the gap between what a study targets and what
it actually estimates can be computed and simulated side by side.
"""

from .estimands import (DegenerateModelError, InfeasibleTargetError,
                        infrequent_observed_component, infrequent_observed_mu,
                        infrequent_target_mu, invert_target_to_nu,
                        sampling_fraction, symptom_prompted_actual_mu,
                        symptom_prompted_target_mu)
from .harness import (ResultRow, ScenarioConfig, load_config, mc_oracle,
                      parse_config, run_scenario, sweep_figure_1a,
                      sweep_figure_1b_a1, write_csv)
from .infer import (EstimationError, StudyDesignFilter, UnitAnalysis,
                    VESarEstimate, WindowAnchor, analyze_unit,
                    bootstrap_ve_se, estimate_ve_sar, identify_index)
from .mc import (mc_detection_fraction, mc_fully_observed_naive,
                 mc_infrequent_observed, mc_symptom_prompted_ve)
from .observe import ObservedUnit, PolicyKind, TestingPolicy, TestRecord, apply_policy
from .params import DurationModelParams, ParameterError, SymptomModelParams
from .simcore import (Infection, Person, SourceKind, TransmissionMode,
                      UnitConfig, UnitTruth, sample_primary, simulate_unit,
                      true_ve_sar)
from .validation import CheckResult, run_validation_suite

__version__ = "0.1.0"

__all__ = [
    "CheckResult", "DegenerateModelError", "DurationModelParams",
    "EstimationError", "InfeasibleTargetError", "Infection",
    "ObservedUnit", "ParameterError", "Person", "PolicyKind", "ResultRow",
    "ScenarioConfig", "SourceKind", "StudyDesignFilter", "SymptomModelParams",
    "TestRecord", "TestingPolicy", "TransmissionMode", "UnitAnalysis",
    "UnitConfig", "UnitTruth", "VESarEstimate", "WindowAnchor",
    "analyze_unit", "apply_policy", "bootstrap_ve_se", "estimate_ve_sar",
    "identify_index",
    "infrequent_observed_component", "infrequent_observed_mu",
    "infrequent_target_mu", "invert_target_to_nu", "load_config",
    "mc_detection_fraction", "mc_fully_observed_naive",
    "mc_infrequent_observed", "mc_oracle", "mc_symptom_prompted_ve",
    "parse_config", "run_scenario", "run_validation_suite",
    "sample_primary", "sampling_fraction", "simulate_unit",
    "sweep_figure_1a", "sweep_figure_1b_a1", "symptom_prompted_actual_mu",
    "symptom_prompted_target_mu", "true_ve_sar", "write_csv",
]
