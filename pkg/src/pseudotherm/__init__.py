"""Thermodynamics of driven pseudo-hermitian systems.

Biorthogonal linear algebra, metric-compatible propagation, two-time work
statistics with the Jarzynski check, and quasistatic cycle accounting, plus
a small config-driven CLI (`pseudotherm`).
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ComplexPartitionFunctionError,
    ConfigError,
    DefectiveMatrixError,
    IsentropeNotFoundError,
    NonRealResultError,
    NonRealSpectrumError,
    NotConvergedError,
    ProtocolRangeError,
    PseudothermError,
    SingularMetricError,
    TruncationWarning,
    UnpairedSpectrumError,
)
from .tolerances import DEFAULT, Tolerances
from .linalg import (
    BiorthogonalEigensystem,
    MetricOperator,
    SpectrumClass,
    SpectrumKind,
    build_metric,
    classify_spectrum,
    conjugate_pairing,
    eigendecompose,
    g_inner,
    g_trace,
    load_matrix,
    pseudo_hermiticity_residual,
    save_matrix,
)
from .models import HatanoNelson, Oscillator, TwoLevel, relaxation_time
from .dynamics import (
    PropagationResult,
    Protocol,
    gauge_field,
    hamiltonian_at,
    propagate,
    unitarity_residual,
)
from .thermo import (
    CycleReport,
    JarzynskiReport,
    ThermalState,
    TwoTimeResult,
    WorkDistribution,
    entropy,
    free_energy,
    internal_energy,
    jarzynski_report,
    partition_function,
    projector,
    quasistatic_cycle,
    thermal_state,
    transition_matrix,
    two_time_work,
    work_distribution,
)

__all__ = [
    "__version__",
    "Tolerances",
    "DEFAULT",
    "PseudothermError",
    "DefectiveMatrixError",
    "UnpairedSpectrumError",
    "ProtocolRangeError",
    "SingularMetricError",
    "NotConvergedError",
    "ComplexPartitionFunctionError",
    "NonRealSpectrumError",
    "NonRealResultError",
    "IsentropeNotFoundError",
    "ConfigError",
    "TruncationWarning",
    "BiorthogonalEigensystem",
    "MetricOperator",
    "SpectrumClass",
    "SpectrumKind",
    "eigendecompose",
    "classify_spectrum",
    "conjugate_pairing",
    "build_metric",
    "pseudo_hermiticity_residual",
    "g_inner",
    "g_trace",
    "save_matrix",
    "load_matrix",
    "TwoLevel",
    "Oscillator",
    "HatanoNelson",
    "relaxation_time",
    "Protocol",
    "PropagationResult",
    "hamiltonian_at",
    "gauge_field",
    "propagate",
    "unitarity_residual",
    "ThermalState",
    "WorkDistribution",
    "JarzynskiReport",
    "TwoTimeResult",
    "CycleReport",
    "partition_function",
    "free_energy",
    "thermal_state",
    "internal_energy",
    "entropy",
    "projector",
    "transition_matrix",
    "work_distribution",
    "jarzynski_report",
    "two_time_work",
    "quasistatic_cycle",
]
