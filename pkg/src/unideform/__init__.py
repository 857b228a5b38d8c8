"""Local counterdiabatic drivers from unitary deformations of adiabatic states.

The package builds the phase and the local (diagonal) potential that make a
unitarily transformed adiabatic state an exact solution, for 1D potentials,
radially symmetric systems and discrete real-symmetric Hamiltonians, and
checks them by propagation. Units: hbar = 1.
"""

from .core import (
    DiscreteRealSymmetric,
    Potential1D,
    Schedule,
    SpatialGrid1D,
    StateVector,
    TimeMesh,
    make_constant_schedule,
    make_polynomial_schedule,
    make_smoothstep_schedule,
    normalize,
)
from .errors import *  # noqa: F401,F403
from .spectral import (
    AdiabaticTrack,
    adiabatic_state,
    adiabatic_tracks,
    bound_states_1d,
    counterdiabatic_hamiltonian,
    counterdiabatic_term,
    eigensystem_real_symmetric,
    gauge_fix_track,
)
from .deform1d import (
    DensityField,
    continuity_residual_radial,
    deformation_from_density,
    dilatation_potential,
    hydrogen_dilatation_driver,
    hydrogen_translation_driver,
    phase_from_continuity_1d,
    potential_from_phase_1d,
    transport_potential,
)
from .deformn import (
    bloch_curves,
    generalized_axis_two_level,
    nlevel_deformation,
    power_sweep,
    state_independence_check,
    two_level_phase,
    two_level_potential,
)
from .evolve import propagate_discrete, split_step_1d, time_evolution_operator
from .verify import compare_drivers, endpoint_conditions, fidelity, invariant_residual

__version__ = "0.1.0"
