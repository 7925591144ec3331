"""salz: superadiabatic (counterdiabatic) driving of two- and
three-level Landau-Zener crossings.

Core pieces: exact and approximate control Hamiltonians (control),
Hamiltonian families (models), a norm-preserving Schrodinger integrator
(propagate), and figure-style experiments with power-law tail fits
(experiments).  Hot kernels are numba-compiled with a pure-numpy
fallback selected by the SALZ_DISABLE_NUMBA environment variable.
"""

from . import control, experiments, models, propagate
from ._backend import BACKEND_NAME
from .control import (
    ControlField,
    ControlKind,
    cd_eps0_analytic,
    cd_exact,
    cd_exact_grid,
    cd_origin_snapshot,
    cd_two_level_analytic,
    control_field,
    crossover_time,
    perturbative_long_time,
    perturbative_small_delta,
    pi_pulse_integral,
    separated_matrix,
    separated_single_field,
)
from .experiments import (
    PowerLawFit,
    SweepResult,
    asymmetric_crossover_experiment,
    control_shape_scan,
    fit_power_law,
    lz_check,
    separability_sweep,
    spectrum_scan,
    tail_exponent_experiment,
)
from .linalg import EigenFrame, hermitian_eigen, pauli_operators, spin1_operators
from .models import DimensionlessUnits, ThreeLevelModel, TwoLevelModel
from .propagate import (
    ObservableSeries,
    Trajectory,
    asymptotic_value,
    diabatic_populations,
    evolve,
    ground_state,
    nonadiabaticity,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "ControlField",
    "ControlKind",
    "DimensionlessUnits",
    "EigenFrame",
    "ObservableSeries",
    "PowerLawFit",
    "SweepResult",
    "ThreeLevelModel",
    "Trajectory",
    "TwoLevelModel",
    "asymmetric_crossover_experiment",
    "asymptotic_value",
    "cd_eps0_analytic",
    "cd_exact",
    "cd_exact_grid",
    "cd_origin_snapshot",
    "cd_two_level_analytic",
    "control",
    "control_field",
    "control_shape_scan",
    "crossover_time",
    "diabatic_populations",
    "evolve",
    "experiments",
    "fit_power_law",
    "ground_state",
    "hermitian_eigen",
    "lz_check",
    "models",
    "nonadiabaticity",
    "pauli_operators",
    "perturbative_long_time",
    "perturbative_small_delta",
    "pi_pulse_integral",
    "propagate",
    "separability_sweep",
    "separated_matrix",
    "separated_single_field",
    "spectrum_scan",
    "spin1_operators",
    "tail_exponent_experiment",
    "__version__",
]
