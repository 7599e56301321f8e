"""Dissipative anisotropic Rabi model: exact, mean-field, cumulant and
rate-equation treatments of the driven-dissipative phase transition.

Layer map:
    model      parameter containers, dimensionless reduction, sign maps
    hilbert    truncated operators, Liouvillian, vectorization helpers
    lindblad   sparse steady states and time evolution
    meanfield  semiclassical fixed points, stability, phase boundaries
    cumulant   second-order moment equations with Gaussian closure
    effective  attractor-hopping rates and stationary mixtures
    scaling    quartic effective potential and finite-eta collapse
    sweep      grid runners, CSV/manifest output, crash isolation
"""

__version__ = "0.1.0"

from .model import (
    ModelParams,
    DimlessParams,
    ParameterError,
    SignTransform,
    to_dimensionless,
    canonicalize,
    params_from_dict,
    params_from_json,
)
from .hilbert import FockCutoff, DensityMatrix, build_operators, hamiltonian, liouvillian
from .lindblad import (
    Observables,
    SteadyStateResult,
    SolverError,
    NonUniqueSteadyStateError,
    CutoffError,
    steady_state,
    observables,
    auto_cutoff,
    evolve,
)
from .meanfield import (
    MFState,
    FixedPoint,
    MFPhase,
    classify_mf,
    sp_fixed_points,
    np_stability,
    boundary_lambda_c,
    boundary_r_pm,
    tricritical_lambda,
)
from .cumulant import (
    CumulantState,
    integrate as cumulant_integrate,
    stationary_normal,
    stationary_normal_numeric,
    delta_correction,
)
from .effective import (
    RateSet,
    StationaryPrediction,
    np_rates,
    np_populations,
    sp_rates,
    sp_population,
    effective_temperature,
    steady_phase,
)
from .scaling import (
    QuarticCoeffs,
    ScalingCoeffs,
    quartic_coeffs,
    q_function,
    collapse_f,
    x2_stationary,
    x2_scaling_form,
    critical_x2,
    scaling_coeffs,
    photon_from_x2,
)

__all__ = [
    "__version__",
    "ModelParams", "DimlessParams", "ParameterError", "SignTransform",
    "to_dimensionless", "canonicalize", "params_from_dict", "params_from_json",
    "FockCutoff", "DensityMatrix", "build_operators", "hamiltonian", "liouvillian",
    "Observables", "SteadyStateResult", "SolverError",
    "NonUniqueSteadyStateError", "CutoffError",
    "steady_state", "observables", "auto_cutoff", "evolve",
    "MFState", "FixedPoint", "MFPhase", "classify_mf", "sp_fixed_points",
    "np_stability", "boundary_lambda_c", "boundary_r_pm", "tricritical_lambda",
    "CumulantState", "cumulant_integrate", "stationary_normal",
    "stationary_normal_numeric", "delta_correction",
    "RateSet", "StationaryPrediction", "np_rates", "np_populations",
    "sp_rates", "sp_population", "effective_temperature", "steady_phase",
    "QuarticCoeffs", "ScalingCoeffs", "quartic_coeffs", "q_function",
    "collapse_f", "x2_stationary", "x2_scaling_form", "critical_x2",
    "scaling_coeffs", "photon_from_x2",
]
