"""walklim: reflected (1,L) random-walk local times, the embedded 2-type
branching structure, and the Feller-diffusion scaling limit."""

__version__ = "0.1.0"

from .errors import (
    EmptySample,
    ExcursionTooLong,
    NotAProbabilityVector,
    NotMeanZero,
    OutOfRange,
    PopulationCapExceeded,
    TruncationBudgetExceeded,
    UnsupportedL,
    WalklimError,
)
from .limit import LimitLaw, LTQuery, euler_sde, finite_dim_lt, phi, psi, \
    sample_path, sample_transition, transition_lt
from .model import ModelConstants, ModelParams, derive_constants, params_from_q, \
    validate_params
from .walk import ExcursionRecord, LocalTimeProfile, extract_branching, local_time, \
    run_excursions, scaled_local_time, simulate_excursion, verify_identity

__all__ = [name for name in dir() if not name.startswith("_")]
