"""Constructors for Gaussian packets and arrival-time eigenfunctions.

Gaussian convention: ``psi(x) ~ exp(-(x - x0)**2 / (4 sigma**2) + i p0 x)``,
so the position spread is ``sigma`` and the momentum spread ``1/(2 sigma)``.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, TruncationWarning
from .spectral import MOMENTUM, POSITION, WaveState

# Momentum-space amplitude below this fraction of the peak counts as
# "outside the support" for truncation checks.
_SUPPORT_TOL = 1e-8


@dataclass(frozen=True)
class ArrivalEigenfunction:
    """Label of a free-particle arrival-time eigenfunction.

    ``alpha`` selects the direction sector (+1 right movers, -1 left movers).
    """

    T: float
    alpha: int
    m: float

    def __post_init__(self):
        if self.alpha not in (1, -1):
            raise ConfigurationError(f"alpha must be +1 or -1, got {self.alpha!r}", field="alpha")
        if not self.m > 0:
            raise ConfigurationError(f"mass must be positive, got {self.m!r}", field="m")

    def amplitude(self, p):
        p = np.asarray(p, dtype=float)
        support = (self.alpha * p) > 0
        return np.where(support, np.sqrt(np.abs(p) / self.m)
                        * np.exp(1j * self.T * p ** 2 / (2 * self.m)), 0.0)


def gaussian_packet(grid, x0, p0, sigma):
    if not sigma > 0:
        raise ConfigurationError(f"sigma must be positive, got {sigma!r}", field="sigma")
    if x0 - 6 * sigma < grid.x_min or x0 + 6 * sigma > grid.x_max:
        warnings.warn(
            f"packet support [{x0 - 6 * sigma}, {x0 + 6 * sigma}] exceeds grid "
            f"[{grid.x_min}, {grid.x_max}]", TruncationWarning, stacklevel=2)
    p_sigma = 1.0 / (2 * sigma)
    if abs(p0) + 6 * p_sigma > grid.p_max:
        warnings.warn(f"momentum support |p0| + 6 sigma_p = {abs(p0) + 6 * p_sigma:.4g} "
                      f"exceeds grid p_max {grid.p_max:.4g}", TruncationWarning, stacklevel=2)
    x = grid.x
    amps = np.exp(-((x - x0) ** 2) / (4 * sigma ** 2) + 1j * p0 * x)
    return WaveState(grid, POSITION, amps).normalize()


def ab_eigenfunction(eigen, grid):
    """Sample an arrival-time eigenfunction on the momentum grid.

    The result is flagged ``generalized``: it is not normalizable.
    """
    return WaveState(grid, MOMENTUM, eigen.amplitude(grid.p), generalized=True)


def _packet_nodes(grid, delta_T, m, half_width):
    # Trapezoid nodes fine enough that the quadrature's alias at
    # E = 2 pi / dT lies beyond the largest grid energy.
    e_max = grid.p_max ** 2 / (2 * m)
    return max(201, int(np.ceil(2 * half_width * delta_T * e_max / np.pi)) + 1)


def ab_packet(grid, T_center, delta_T, alpha, m, n_nodes=None, half_width=6.0):
    """Normalized Gaussian superposition of arrival-time eigenfunctions.

    Weight ``exp(-(T' - T_center)**2 / (2 delta_T**2))`` over
    ``T_center +- half_width * delta_T`` by the trapezoid rule.
    """
    if not delta_T > 0:
        raise ConfigurationError(f"delta_T must be positive, got {delta_T!r}", field="delta_T")
    base = ArrivalEigenfunction(0.0, alpha, m).amplitude(grid.p)
    if n_nodes is None:
        n_nodes = _packet_nodes(grid, delta_T, m, half_width)
    t_nodes = T_center + delta_T * np.linspace(-half_width, half_width, n_nodes)
    w = np.exp(-((t_nodes - T_center) ** 2) / (2 * delta_T ** 2))
    w[0] *= 0.5
    w[-1] *= 0.5
    p = grid.p
    energy = p ** 2 / (2 * m)
    # sum_j w_j exp(i T_j E), evaluated in chunks to bound memory
    acc = np.zeros(grid.n_points, dtype=complex)
    for start in range(0, n_nodes, 256):
        tj = t_nodes[start:start + 256]
        acc += np.exp(1j * np.outer(energy, tj)) @ w[start:start + 256]
    amps = base * acc
    # the packet's momentum envelope is exp(-delta_T**2 E**2 / 2)
    edge = np.abs(amps[[1, -2]]).max()
    if edge > _SUPPORT_TOL * np.abs(amps).max():
        warnings.warn(f"delta_T={delta_T} packet extends past the momentum grid "
                      f"(p_max={grid.p_max:.4g})", TruncationWarning, stacklevel=2)
    return WaveState(grid, MOMENTUM, amps).normalize()
