"""Learning dynamics in production economies.

* ``prqlin``: Proportional Response on quasi-linear Fisher markets, which converges.
* ``chaos``: Gradient Ascent on Cournot / Tullock competition, chaotic for large steps.
* ``br``: Best Response duopoly dynamics around a spiral fixed point.
"""

from .br import StabilityReport, br_fixed_point, br_step, classify_stability, simulate_br
from .chaos import (
    GaMapParams,
    LiYorkeCertificate,
    certify_li_yorke,
    find_period3,
    ga_map,
    invariant_interval,
    min_chaotic_eta,
    simulate_ga,
)
from .economy import (
    DegenerateError,
    DomainError,
    Economy,
    MarketError,
    PriceFamily,
    ShapeError,
    SpendingState,
    fm_utility,
    market_share,
    price_at,
    tc_utility,
)
from .equilibrium import (
    EquilibriumReport,
    best_response_oracle,
    check_equilibrium,
    delta_prime,
    delta_prime_bound,
    foc_residual_me,
    foc_residual_ne,
)
from .prqlin import MdConfig, bregman_gap, kl_divergence, md_step, pr_step, run_pr, sh_gradient, sh_objective
from .trajectory import Trajectory

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
