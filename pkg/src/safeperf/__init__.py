"""Safety-objective driven performance requirements for ML detection components."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .confirmation import (
    ConfirmationModel,
    DetectionVector,
    KinematicProfile,
    admissible_frontier,
    binomial_tail_geq,
    confirm,
    critical_miss_probability,
    curve_dataset,
    detection_vector_size,
    prob_confirm,
    prob_reject,
    tolerable_miss_ratio,
)
from .errors import DomainError, InfeasibleError, SafeperfError, ValidationError
from .generalization import (
    DiscreteModelSpec,
    GapBound,
    LabeledDataset,
    RiskEstimate,
    empirical_risk,
    expected_zero_one_loss,
    false_negative_rate,
    hoeffding_delta,
    population_risk,
    required_sample_size,
    tolerance_from_margin,
    true_positive_rate,
    zero_one_loss,
)
from .requirements import (
    MeasuredMetrics,
    RequirementRecord,
    RequirementSet,
    Scenario,
    check_compliance,
    derive_requirements,
    render,
)
from .safety_model import (
    BasicEvent,
    ExposureProfile,
    ExposureUnit,
    FaultTree,
    Gate,
    GateKind,
    Qso,
    Severity,
    allocate_budgets,
    evaluate_fault_tree,
    normalize_qso,
)
from .simulation import SimConfig, SimResult, markov_reject_exact, simulate_iid, simulate_markov

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "InfeasibleError",
    "SafeperfError",
    "ValidationError",
    "BasicEvent",
    "ConfirmationModel",
    "DetectionVector",
    "DiscreteModelSpec",
    "ExposureProfile",
    "ExposureUnit",
    "FaultTree",
    "GapBound",
    "Gate",
    "GateKind",
    "KERNEL_BACKEND",
    "KinematicProfile",
    "LabeledDataset",
    "MeasuredMetrics",
    "Qso",
    "RequirementRecord",
    "RequirementSet",
    "RiskEstimate",
    "Scenario",
    "Severity",
    "SimConfig",
    "SimResult",
    "admissible_frontier",
    "allocate_budgets",
    "binomial_tail_geq",
    "check_compliance",
    "confirm",
    "critical_miss_probability",
    "curve_dataset",
    "derive_requirements",
    "detection_vector_size",
    "empirical_risk",
    "evaluate_fault_tree",
    "expected_zero_one_loss",
    "false_negative_rate",
    "hoeffding_delta",
    "markov_reject_exact",
    "normalize_qso",
    "population_risk",
    "prob_confirm",
    "prob_reject",
    "render",
    "required_sample_size",
    "simulate_iid",
    "simulate_markov",
    "tolerable_miss_ratio",
    "tolerance_from_margin",
    "true_positive_rate",
    "zero_one_loss",
]
