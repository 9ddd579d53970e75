"""Heralded cavity-mediated entangling gates: effective theory, full
Lindblad dynamics, calibration, and repeater-level figures of merit."""

from .params import DriveSchedule, Envelope, Scheme, SystemParams, envelope_value
from .space import BasisLabel, OperatorRep, ProductSpace, lindblad_set
from .models import ModelSplit, build_model, no_jump_hamiltonian
from .effective import (
    EffectiveModel,
    SingularParameterError,
    asymptotic_limits,
    conditional_sector_evolution,
    effective_closed_form,
    effective_generic,
    sector_density_evolution,
    sector_weights,
    success_probability,
    two_photon_residual_error,
)
from .dynamics import (
    FullGateReport,
    GateWindowError,
    IntegrationQualityError,
    TimeSeries,
    extract_gate_report,
    integrate_master_equation,
    optimize_phases,
    sector_decay_rate,
)
from .gates import (
    DegenerateGateError,
    ErrorBudget,
    GateReport,
    ToffoliScaling,
    cz_analytic_detunings,
    cz_protocol,
    rb87_error_budget,
    toffoli_detuning,
    toffoli_protocol,
    toffoli_scaling,
)
from .calibrate import (
    CalibrationError,
    CalibrationResult,
    RateSource,
    ValidityReport,
    equalize_rates,
    tradeoff_search,
    validity_check,
)
from .repeater import (
    RepeaterConfig,
    max_links,
    rate_exact_recursive,
    rate_scaling,
)

__version__ = "0.1.0"

__all__ = [
    "DriveSchedule",
    "Envelope",
    "Scheme",
    "SystemParams",
    "envelope_value",
    "BasisLabel",
    "OperatorRep",
    "ProductSpace",
    "lindblad_set",
    "ModelSplit",
    "build_model",
    "no_jump_hamiltonian",
    "EffectiveModel",
    "SingularParameterError",
    "asymptotic_limits",
    "conditional_sector_evolution",
    "effective_closed_form",
    "effective_generic",
    "sector_density_evolution",
    "sector_weights",
    "success_probability",
    "two_photon_residual_error",
    "FullGateReport",
    "GateWindowError",
    "IntegrationQualityError",
    "TimeSeries",
    "extract_gate_report",
    "integrate_master_equation",
    "optimize_phases",
    "sector_decay_rate",
    "DegenerateGateError",
    "ErrorBudget",
    "GateReport",
    "ToffoliScaling",
    "cz_analytic_detunings",
    "cz_protocol",
    "rb87_error_budget",
    "toffoli_detuning",
    "toffoli_protocol",
    "toffoli_scaling",
    "CalibrationError",
    "CalibrationResult",
    "RateSource",
    "ValidityReport",
    "equalize_rates",
    "tradeoff_search",
    "validity_check",
    "RepeaterConfig",
    "max_links",
    "rate_exact_recursive",
    "rate_scaling",
    "__version__",
]
