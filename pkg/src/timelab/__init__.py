"""Numerical laboratory for time-of-arrival and clock-pointer measurements.

Units are hbar = 1 throughout.
"""
__version__ = "0.1.0"

from .arrival import (ArrivalDistribution, arrival_density, covariance_residual, moments,
                      smeared_overlap, wigner_margin)
from .measurement import (AbsorbingPotential, KickSpec, absorb_evolve, evolve_theta_clock,
                          free_evolve, impulsive_kick, pointer_marginal, resolution_sweep)
from .spectral import (Grid1D, TwoBodyState, WaveState, expectation, inner_product, make_grid,
                       spread, transform)
from .states import ArrivalEigenfunction, ab_eigenfunction, ab_packet, gaussian_packet

__all__ = [
    "AbsorbingPotential", "ArrivalDistribution", "ArrivalEigenfunction", "Grid1D", "KickSpec",
    "TwoBodyState", "WaveState", "ab_eigenfunction", "ab_packet", "absorb_evolve",
    "arrival_density", "covariance_residual", "evolve_theta_clock", "expectation",
    "free_evolve", "gaussian_packet", "impulsive_kick", "inner_product", "make_grid", "moments",
    "pointer_marginal", "resolution_sweep", "smeared_overlap", "spread", "transform",
    "wigner_margin",
]
