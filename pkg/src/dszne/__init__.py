"""Zero-noise extrapolation on error-corrected logical qubits.

Noise is amplified either by lowering the surface-code distance
(distance-scaled ZNE) or by global unitary folding, and both are compared
with unmitigated execution on two-qubit randomized-benchmarking circuits.
"""

from .clifford import CliffordTableau, PauliString, random_clifford
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    effective_code_distance,
    effective_shots,
    qubit_savings,
    run_comparison,
    virtual_cores,
)
from .extrapolation import ScaledData, extrapolate, fit_exponential, fit_polynomial
from .noise import DistancePlan, NoiseModel, ds_scale_factors, logical_error_rate
from .rb_circuits import RbCircuit, fold_global, generate_rb
from .simulator import Observable, run_exact, run_stabilizer

__version__ = "0.1.0"

__all__ = [
    "CliffordTableau",
    "PauliString",
    "random_clifford",
    "ExperimentConfig",
    "ExperimentResult",
    "effective_code_distance",
    "effective_shots",
    "qubit_savings",
    "run_comparison",
    "virtual_cores",
    "ScaledData",
    "extrapolate",
    "fit_exponential",
    "fit_polynomial",
    "DistancePlan",
    "NoiseModel",
    "ds_scale_factors",
    "logical_error_rate",
    "RbCircuit",
    "fold_global",
    "generate_rb",
    "Observable",
    "run_exact",
    "run_stabilizer",
]
