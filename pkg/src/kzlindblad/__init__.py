"""Quench dynamics of two-band lattice fermions under sublattice loss."""

from .errors import (
    ConfigError,
    DomainError,
    KZLindbladError,
    PreconditionError,
    SingularPointError,
    StiffnessError,
)
from .lindblad import (
    DissipationConfig,
    IntegratorConfig,
    ModeState,
    ModeTrajectory,
    evolve_mode,
    evolve_modes,
    initial_state,
    rhs,
    rhs_no_jump,
)
from .models import (
    BlochVector,
    CriticalMode,
    Haldane,
    QuenchProtocol,
    RiceMele,
    Shockley,
    bloch_vector,
    bogoliubov,
    bz_grid,
    critical_modes,
    winding_number,
)
from .observables import ObservableSeries, aggregate, excitation_probability, run_quench, sweep
from .scaling import FitResult, plateau_detect, powerlaw_fit

__version__ = "0.1.0"
