"""Berry phases of two- and three-level Hamiltonians, Berry-corrected
semiclassical spectra, and the line broadening induced by a fundamental
length."""

from .berry import (
    BerryPhaseResult,
    ParameterLoop,
    analytic_su3_phase,
    analytic_two_level_phase,
    connection_integral_su3,
    wilson_loop_phase,
)
from .broadening import (
    BroadeningReport,
    MeadBound,
    PatchConfig,
    mead_bound,
    scaling_study,
    sweep_patch,
    sweep_patch_su3,
)
from .models import (
    CollectiveModel,
    ThreeLevelModel,
    TwoLevelModel,
    collective_derivative,
    collective_energy,
    three_level_hamiltonian,
    three_level_state,
    two_level_hamiltonian,
)
from .numerics import EigenSystem, FitResult, eig_hermitian, fit_loglog, integrate_closed, solve_scalar
from .quantize import QuantizedLevel, quantize_level, spectrum

__version__ = "0.1.0"
