"""Selection (multi-user) diversity when the number of users is random."""

from .fading import NakagamiM, Rayleigh, Rician, parse_fading
from .metrics import (
    ExpForm,
    QForm,
    avg_error_fixed_n,
    avg_error_random_n,
    ergodic_capacity_fixed_n,
    ergodic_capacity_random_n,
    parse_error_model,
    poisson_rayleigh_error_closed,
)
from .selection import BestGainLaw, best_cdf
from .usercount import Deterministic, Geometric, Poisson, ZeroTruncatedPoisson, parse_users

__version__ = "0.1.0"
