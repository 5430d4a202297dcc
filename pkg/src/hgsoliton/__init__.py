"""H^g invariants, weighted K-stability data and soliton candidates for toric
log Fano polytopes and rank-one valuation profiles."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    DegeneratePolytope,
    HgError,
    InvalidInput,
    NoConvergence,
    NotAdmissible,
    NotCoercive,
    ToleranceNotMet,
    ZeroTwist,
)
from .geom import Polytope, build_polytope, lattice_points, support_value, triangulate  # noqa: F401
from .weights import EXP, WeightFn, derivative_weight, make_exp_mix  # noqa: F401
from .dhm import DHMeasure, d1, discrete_dh, pushforward_density  # noqa: F401
from .invariants import Twist, ding, delta_toric, hg, hg_grad_hess, s_weighted  # noqa: F401
from .solver import SolitonCert, minimize_hg, polystable_report, weight_sweep  # noqa: F401
from .rankone import Profile, beta_tilde, minimize_beta, profile_from_toric  # noqa: F401
