"""Random walk sampling, loop erasure and non-intersection estimators."""
from .estimators import (
    STEP_CAP,
    Grid,
    McEstimate,
    VARecord,
    chordal_lerw_conditioned,
    chordal_probability,
    lerw_endpoints,
    loop_erase,
    phat_A_empirical,
    phi_estimate,
    phi_ratio,
    sample_V_A,
)
from .rng import RngStream

__all__ = [
    "STEP_CAP", "Grid", "McEstimate", "VARecord", "RngStream", "chordal_lerw_conditioned",
    "chordal_probability", "lerw_endpoints", "loop_erase", "phat_A_empirical", "phi_estimate",
    "phi_ratio", "sample_V_A",
]
