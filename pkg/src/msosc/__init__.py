"""Eight-step symmetric multistep methods with phase-lag fitting."""
from .coefficients import (
    CoefficientSet,
    EvaluationPath,
    Variant,
    classical_coefficients,
    evaluate,
    phase_fitted_coefficients,
    zero_pld1_coefficients,
    zero_pld2_coefficients,
    zero_pld3_coefficients,
)
from .errors import MsoscError
from .integrator import (
    FrequencySchedule,
    SecondOrderProblem,
    Trajectory,
    gauss_tableau,
    integrate_multistep,
    integrate_reference,
    linear_oscillator,
    solve_multistep,
    start_values,
)

__version__ = "0.1.0"

__all__ = [
    "CoefficientSet",
    "EvaluationPath",
    "Variant",
    "classical_coefficients",
    "evaluate",
    "phase_fitted_coefficients",
    "zero_pld1_coefficients",
    "zero_pld2_coefficients",
    "zero_pld3_coefficients",
    "MsoscError",
    "FrequencySchedule",
    "SecondOrderProblem",
    "Trajectory",
    "gauss_tableau",
    "integrate_multistep",
    "integrate_reference",
    "linear_oscillator",
    "solve_multistep",
    "start_values",
]
