"""Ideal (POVM) statistics of the free-particle time of arrival at x = 0.

The arrival amplitude in sector ``alpha`` is the momentum-grid quadrature

    A_alpha(T) = sum_k conj(phi(p_k)) Phi_{T alpha}(p_k) dp

and the density is ``Pi(T) = (1/2pi) sum_alpha |A_alpha(T)|**2``; the
``1/2pi`` makes ``int Pi dT = 1`` for the eigenfunctions as sampled in
:func:`timelab.states.ab_eigenfunction`.

Far outside the bulk the density falls off as ``C |T|**-1.5`` with ``C``
fixed by the momentum amplitude at ``p = 0``; :attr:`ArrivalDistribution.
completed_mass` adds that analytic tail to the window quadrature.

Only use T windows shorter than the time the fastest relevant momentum
needs to cross the periodic box: the discrete momentum sum sees periodic
images of the state, and an image arriving inside the window adds
spurious probability.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .errors import ConfigurationError, CoverageWarning, UndefinedMomentsError
from .measurement import free_evolve
from .spectral import MOMENTUM, POSITION, expectation, spread, transform

_BLOCK = 64
# momentum amplitudes smaller than this (relative) are dropped
_PRUNE = 1e-14


def _trapezoid(y, x):
    return float(np.trapezoid(y, x)) if hasattr(np, "trapezoid") else float(np.trapz(y, x))


@dataclass(frozen=True)
class ArrivalDistribution:
    T_samples: np.ndarray
    density: np.ndarray
    m: float
    source: dict = field(default_factory=dict)
    n_points: int = 0
    T_range: tuple = (0.0, 0.0)
    tail_coefficient: float = 0.0

    def __post_init__(self):
        for name in ("T_samples", "density"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def captured_mass(self):
        return _trapezoid(self.density, self.T_samples)

    def tail_mass(self):
        """Asymptotic probability outside the window, or None if undefined.

        Needs a window with ``T_lo < 0 < T_hi``; only meaningful when both
        edges are far out in the ``|T|**-1.5`` regime.
        """
        t_lo, t_hi = self.T_range
        if not t_lo < 0 < t_hi:
            return None
        c = self.tail_coefficient
        return 2 * c / np.sqrt(t_hi) + 2 * c / np.sqrt(-t_lo)

    @property
    def completed_mass(self):
        tail = self.tail_mass()
        return None if tail is None else self.captured_mass + tail


def _sector_coefficients(phi, m):
    """Per-sector (energies, weights) with conj(phi) sqrt(|p|/m) dp folded in."""
    s = transform(phi, MOMENTUM)
    p = s.grid.p
    c = np.conj(s.amplitudes) * np.sqrt(np.abs(p) / m) * s.grid.dp
    cutoff = _PRUNE * np.abs(c).max() if c.size else 0.0
    out = []
    for alpha in (1, -1):
        keep = (alpha * p > 0) & (np.abs(c) > cutoff)
        out.append((alpha, p[keep] ** 2 / (2 * m), c[keep]))
    return out


def _uniform_sum(energy, coeff, t0, dt, n_t):
    """``sum_k coeff_k exp(i T_j E_k)`` for ``T_j = t0 + j dt``.

    Splits ``T_j`` into block offsets and in-block steps so the bulk of the
    work is a single complex matrix product.
    """
    if energy.size == 0:
        return np.zeros(n_t, dtype=complex)
    n_blocks = -(-n_t // _BLOCK)
    starts = t0 + dt * _BLOCK * np.arange(n_blocks)
    v = np.exp(1j * np.outer(starts, energy)) * coeff
    steps = np.exp(1j * np.outer(dt * np.arange(_BLOCK), energy))
    return (v @ steps.T).ravel()[:n_t]


def arrival_amplitudes(phi, m, T_samples):
    """Sector amplitudes ``{alpha: A_alpha(T)}`` on uniform ``T_samples``."""
    T = np.asarray(T_samples, dtype=float)
    dt = T[1] - T[0] if T.size > 1 else 0.0
    out = {}
    for alpha, energy, coeff in _sector_coefficients(phi, m):
        out[alpha] = _uniform_sum(energy, coeff, T[0], dt, T.size)
    return out


def tail_coefficient(phi, m):
    """``C`` in ``Pi(T) ~ C |T|**-1.5`` as ``|T| -> infinity``.

    Stationary phase at ``p = 0`` in both sectors gives
    ``C = |phi(0)|**2 Gamma(3/4)**2 (2m)**1.5 / (4 pi m)``.
    """
    s = transform(phi, POSITION)
    phi0 = np.sum(s.amplitudes) * s.grid.dx / np.sqrt(2 * np.pi)
    return float(abs(phi0) ** 2 * gamma(0.75) ** 2 * (2 * m) ** 1.5 / (4 * np.pi * m))


def _default_window(phi, m):
    x_mean = expectation(phi, "x")
    p_mean = expectation(phi, "p")
    if abs(p_mean) <= 1e-12 * spread(phi, "p"):
        raise ConfigurationError("cannot infer a T window for a state with zero mean momentum",
                                 field="T_range")
    t_mean = -m * x_mean / p_mean
    t_spread = (m * abs(x_mean) * spread(phi, "p") / p_mean ** 2
                + m * spread(phi, "x") / abs(p_mean))
    return (t_mean - 10 * t_spread, t_mean + 10 * t_spread)


def arrival_density(phi, m, T_range=None, n_T=2048):
    """Arrival-time density of a normalized state at the detector x = 0."""
    phi.require_normalizable()
    if not m > 0:
        raise ConfigurationError(f"mass must be positive, got {m!r}", field="m")
    if T_range is None:
        T_range = _default_window(phi, m)
    t_lo, t_hi = map(float, T_range)
    if not t_hi > t_lo or n_T < 2:
        raise ConfigurationError(f"bad T window {T_range!r} / n_T={n_T}", field="T_range")
    T = np.linspace(t_lo, t_hi, int(n_T))
    amps = arrival_amplitudes(phi, m, T)
    density = sum(np.abs(a) ** 2 for a in amps.values()) / (2 * np.pi)
    dist = ArrivalDistribution(T, density, m, source={"kind": "wavestate"},
                               n_points=phi.grid.n_points, T_range=(t_lo, t_hi),
                               tail_coefficient=tail_coefficient(phi, m))
    if dist.captured_mass < 0.99:
        warnings.warn(f"T window captures only {dist.captured_mass:.4f} of the probability",
                      CoverageWarning, stacklevel=2)
    return dist


def sector_weights(phi, m, T_range, n_T=2048):
    """Captured probability per direction sector."""
    T = np.linspace(T_range[0], T_range[1], int(n_T))
    amps = arrival_amplitudes(phi, m, T)
    return {a: _trapezoid(np.abs(v) ** 2 / (2 * np.pi), T) for a, v in amps.items()}


def smeared_overlap(T, T_prime, alpha, alpha_prime, w, m=1.0, panels=None):
    """Eigenfunction overlap ``<T alpha|T' alpha'>`` smeared over ``T'``.

    The smearing is a normalized Gaussian of width ``w`` in ``T'``; in the
    momentum integral it becomes the factor ``exp(-w**2 E**2 / 2)``.
    Overlaps carry the same ``1/2pi`` measure as the density, so the real
    part at ``T = T'`` tends to half the test function's peak value.
    """
    if not w > 0:
        raise ConfigurationError(f"test width must be positive, got {w!r}", field="w")
    if alpha not in (1, -1) or alpha_prime not in (1, -1):
        raise ConfigurationError("alpha must be +1 or -1", field="alpha")
    if alpha != alpha_prime:
        # the Theta(alpha p) supports are disjoint
        return 0j
    s = T_prime - T
    e_max = np.sqrt(80.0) / w
    p_max = np.sqrt(2 * m * e_max)
    if panels is None:
        panels = max(256, int(np.ceil(8 * abs(s) * e_max / np.pi)))
    nodes, weights = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(0.0, p_max, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    p = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    wq = (half[:, None] * weights[None, :]).ravel()
    energy = p ** 2 / (2 * m)
    integrand = (p / m) * np.exp(1j * s * energy - 0.5 * (w * energy) ** 2)
    return complex(np.sum(wq * integrand) / (2 * np.pi))


def moments(dist, t_ref=None):
    """Mean arrival time and root second moment about ``t_ref``.

    Both are normalized by the captured mass.  ``t_ref`` defaults to the
    mean, in which case ``tau`` is the standard deviation.
    """
    mass = dist.captured_mass
    if not mass > 0:
        raise UndefinedMomentsError("distribution has zero captured mass")
    if mass < 0.99:
        warnings.warn(f"moments of a distribution with captured mass {mass:.4f}",
                      CoverageWarning, stacklevel=2)
    T, rho = dist.T_samples, dist.density
    mean = _trapezoid(T * rho, T) / mass
    ref = mean if t_ref is None else float(t_ref)
    tau = np.sqrt(_trapezoid((T - ref) ** 2 * rho, T) / mass)
    return {"mean": mean, "tau": float(tau)}


def wigner_margin(phi, dist, t_ref=None, m=None):
    """``tau * <E>``; the Wigner relation holds when this exceeds 1."""
    m = dist.m if m is None else m
    energy = expectation(phi, "kinetic", m)
    if not energy > 0:
        raise UndefinedMomentsError("zero-energy state has no Wigner margin")
    return moments(dist, t_ref)["tau"] * energy


def covariance_residual(phi, t, m, T_range, n_T=2048):
    """Relative sup-norm mismatch between ``Pi_{phi(t)}(T)`` and ``Pi_phi(T + t)``."""
    phi.require_normalizable()
    t_lo, t_hi = map(float, T_range)
    evolved = arrival_density(free_evolve(phi, t, m), m, (t_lo, t_hi), n_T)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CoverageWarning)
        shifted = arrival_density(phi, m, (t_lo + t, t_hi + t), n_T)
    scale = max(evolved.density.max(), shifted.density.max())
    return float(np.max(np.abs(evolved.density - shifted.density)) / scale)
