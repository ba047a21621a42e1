"""Direct-measurement dynamics on grids.

Two-body evolutions run in the (particle position, pointer momentum)
representation.  The pointer in the clock model has no kinetic term, so
its momentum is conserved and every pointer-momentum column evolves
independently under ``p**2/2m + k * Theta(-x)``.

Pointer sign convention: a measurement interaction of strength
``lambda * A`` moves the pointer to ``z0 + lambda * a``, i.e. the unitary
is ``exp(-i lambda A pi_z)``.  The clock coupling ``Theta(-x) pi_z`` makes
the pointer advance at unit rate while the particle is at ``x < 0``.
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import ConfigurationError, StepSizeError, UnsupportedObservableError
from .spectral import (MOMENTUM, POSITION, TwoBodyState, WaveState, _phases,
                       transform)


def _check_mass(m, name="m"):
    if not m > 0:
        raise ConfigurationError(f"mass must be positive, got {m!r}", field=name)


def free_evolve(psi, t, m):
    """Exact free propagation: momentum amplitudes times ``exp(-i p**2 t / 2m)``."""
    _check_mass(m)
    s = transform(psi, MOMENTUM)
    amps = s.amplitudes * np.exp(-1j * s.grid.p ** 2 * t / (2 * m))
    return transform(WaveState(s.grid, MOMENTUM, amps, psi.generalized), psi.basis)


def _step_check(grid, m, dt):
    phase = dt * grid.p_max ** 2 / (2 * m)
    if not 0 < dt or phase >= np.pi:
        raise StepSizeError(
            f"dt={dt} gives max kinetic phase {phase:.3g} >= pi; use dt < "
            f"{2 * m * np.pi / grid.p_max ** 2:.3g}")


def max_stable_dt(grid, m):
    return 2 * m * np.pi / grid.p_max ** 2


def _theta(x):
    # sharp step, 1/2 exactly on the boundary sample
    return np.heaviside(x, 0.5)


class _Stepper:
    """Strang splitting on the x axis (last axis) of a 1-D or 2-D array.

    Works on ``b = pre * a`` where ``a`` is the position representation;
    in that variable the unitary transform reduces to a bare FFT pair and
    diagonal position factors commute with ``pre``.
    """

    def __init__(self, grid, m, dt):
        self.grid = grid
        self.pre, _ = _phases(grid)
        # raw FFT ordering coincides with the ascending p grid
        self.energy = grid.p ** 2 / (2 * m)
        self.half = np.exp(-0.5j * dt * self.energy)
        self.full = self.half ** 2

    def enter(self, a_pos):
        return a_pos * self.pre

    def leave(self, b):
        return b * self.pre.conj()

    def kinetic(self, b, factor):
        return scipy.fft.ifft(scipy.fft.fft(b, axis=-1) * factor, axis=-1)

    def run(self, b, diag, n_steps, callback=None):
        """``n_steps`` of K/2 D K/2 with consecutive half steps merged."""
        if n_steps == 0:
            return b
        b = self.kinetic(b, self.half)
        for i in range(n_steps):
            b = b * diag
            if callback is not None:
                callback(i, b)
            b = self.kinetic(b, self.half if i == n_steps - 1 else self.full)
        return b


@dataclass(frozen=True)
class KickSpec:
    """Impulsive coupling ``lambda * A (x) pi_z`` with ``A`` diagonal in ``basis``.

    ``values`` is either an array sampled on the system grid in ``basis``
    or a callable evaluated on those samples.
    """

    lam: float
    basis: str
    values: object

    def table(self, grid):
        if self.basis not in (POSITION, MOMENTUM):
            raise UnsupportedObservableError(
                f"observable must be diagonal in position or momentum, got {self.basis!r}")
        v = self.values(grid.samples(self.basis)) if callable(self.values) else self.values
        v = np.asarray(v, dtype=float)
        if v.shape != (grid.n_points,) or not np.all(np.isfinite(v)):
            raise ConfigurationError("observable table must be finite and match the grid",
                                     field="values")
        return v


def impulsive_kick(state, kick):
    """Apply the exact measurement unitary; the pointer shifts by ``lambda * a``."""
    a_tab = kick.table(state.grid_x)
    s = state.to(basis_x=kick.basis, basis_z=MOMENTUM)
    k = state.grid_z.p
    amps = s.amplitudes * np.exp(-1j * kick.lam * np.outer(k, a_tab))
    out = TwoBodyState(s.grid_x, s.grid_z, kick.basis, MOMENTUM, amps)
    return out.to(basis_x=state.basis_x, basis_z=state.basis_z)


# pointer-momentum rows whose peak amplitude is below this fraction of the
# global peak are carried along without evolution
_ROW_CUTOFF = 1e-15


def evolve_theta_clock(state, m, dt, n_steps, coupling=1.0, M=math.inf):
    """Split-operator evolution under ``p**2/2m + coupling * Theta(-x) pi_z``.

    A finite pointer mass ``M`` adds ``pi_z**2 / 2M``; that factor is
    diagonal in the pointer momentum and commutes with everything else.
    Pointer momentum is conserved, so rows of negligible amplitude are
    skipped; their contribution to any density is below 1e-30.
    """
    _check_mass(m)
    _check_mass(M, "M")
    _step_check(state.grid_x, m, dt)
    s = state.to(basis_x=POSITION, basis_z=MOMENTUM)
    k = state.grid_z.p
    stepper = _Stepper(state.grid_x, m, dt)
    phase = coupling * np.outer(k, _theta(-state.grid_x.x))
    if math.isfinite(M):
        phase = phase + (k ** 2 / (2 * M))[:, None]
    diag = np.exp(-1j * dt * phase)
    amps = np.array(s.amplitudes)
    row_peak = np.abs(amps).max(axis=1)
    active = row_peak > _ROW_CUTOFF * row_peak.max()
    b = stepper.run(stepper.enter(amps[active]), diag[active], int(n_steps))
    amps[active] = stepper.leave(b)
    out = TwoBodyState(state.grid_x, state.grid_z, POSITION, MOMENTUM, amps)
    return out.to(basis_x=state.basis_x, basis_z=state.basis_z)


def pointer_marginal(state):
    """Pointer position density with mean and spread."""
    s = state.to(basis_z=POSITION)
    dens = np.sum(np.abs(s.amplitudes) ** 2, axis=1) * s.grid_x.measure(s.basis_x)
    z = s.grid_z.x
    dz = s.grid_z.dx
    mass = float(np.sum(dens) * dz)
    mean = float(np.sum(z * dens) * dz / mass)
    spread_ = float(np.sqrt(np.sum((z - mean) ** 2 * dens) * dz / mass))
    return {"z_samples": z, "density": dens, "mass": mass, "mean": mean, "spread": spread_}


@dataclass(frozen=True)
class AbsorbingPotential:
    """Absorber of strength ``V`` on the half line ``x > 0``."""

    V: float

    def __post_init__(self):
        if not self.V > 0:
            raise ConfigurationError(f"absorber strength must be positive, got {self.V!r}",
                                     field="V")


def absorb_evolve(psi, pot, m, dt, n_steps):
    """Evolve with the decaying factor ``exp(-V dt Theta(x))`` between kinetic half steps.

    Returns the final state, the sample times and the absorbed fraction
    ``1 - ||psi(t)||**2`` after every step.
    """
    _check_mass(m)
    psi.require_normalizable()
    _step_check(psi.grid, m, dt)
    s = transform(psi, POSITION)
    stepper = _Stepper(psi.grid, m, dt)
    diag = np.exp(-pot.V * dt * _theta(psi.grid.x))
    dx = psi.grid.dx
    n0 = float(np.sum(np.abs(s.amplitudes) ** 2) * dx)
    norms = np.empty(int(n_steps) + 1)
    norms[0] = n0

    def record(i, b):
        # the absorber factor was just applied; later kinetic factors are unitary
        norms[i + 1] = np.sum(np.abs(b) ** 2) * dx

    b = stepper.run(stepper.enter(s.amplitudes), diag, int(n_steps), record)
    final = WaveState(psi.grid, POSITION, stepper.leave(b))
    times = dt * np.arange(int(n_steps) + 1)
    return {"state": transform(final, psi.basis), "times": times, "norm_squared": norms,
            "absorbed_fraction": 1.0 - norms / n0}


def probability_current(psi, m, at=0.0):
    """Probability current ``Im(conj(psi) dpsi/dx) / m`` at the point ``at``.

    The derivative is spectral; the field is evaluated by direct Fourier
    summation so ``at`` need not be a grid sample.
    """
    s = transform(psi, MOMENTUM)
    p = s.grid.p
    kernel = np.exp(1j * p * at) * s.grid.dp / np.sqrt(2 * np.pi)
    value = np.sum(s.amplitudes * kernel)
    deriv = np.sum(1j * p * s.amplitudes * kernel)
    return float(np.imag(np.conj(value) * deriv) / m)


def free_flux_integral(psi, m, t_final, n_t=2001, at=0.0):
    """``int_0^t_final j(at, t) dt`` under free evolution (trapezoid in t).

    Without an absorber this is the probability that has crossed ``at``;
    it is the flux oracle for :func:`absorb_evolve`.
    """
    times = np.linspace(0.0, float(t_final), int(n_t))
    s = transform(psi, MOMENTUM)
    p = s.grid.p
    kernel = np.exp(1j * p * at) * s.grid.dp / np.sqrt(2 * np.pi)
    # amplitudes at every time: rows are times
    amps = s.amplitudes[None, :] * np.exp(-1j * np.outer(times, p ** 2) / (2 * m))
    value = amps @ kernel
    deriv = amps @ (1j * p * kernel)
    current = np.imag(np.conj(value) * deriv) / m
    return float(np.sum(0.5 * (current[1:] + current[:-1]) * np.diff(times)))


def theta_clock_run(m, x0, p0, sigma, pointer_width, grid_x, grid_z, t_final, dt=None,
                    coupling=1.0):
    """Gaussian particle and Gaussian pointer at z = 0, evolved to ``t_final``.

    Returns the initial and final pointer marginals and the run settings.
    """
    from .states import gaussian_packet

    particle = gaussian_packet(grid_x, x0, p0, sigma)
    pointer = gaussian_packet(grid_z, 0.0, 0.0, pointer_width)
    state = TwoBodyState.product(particle, pointer)
    if dt is None:
        dt = 0.5 * max_stable_dt(grid_x, m)
    n_steps = max(1, int(np.ceil(t_final / dt)))
    dt = t_final / n_steps
    final = evolve_theta_clock(state, m, dt, n_steps, coupling=coupling)
    return {"initial": pointer_marginal(state), "final": pointer_marginal(final),
            "dt": dt, "n_steps": n_steps, "norm": final.norm()}


def sweep_grids(m, x0, sigma, p0, pointer_width, t_final, n_x=1024, n_z=512):
    """Particle and pointer grids sized for one clock run.

    The pointer grid resolves pointer momenta up to ``6/pointer_width`` and
    holds records up to ``t_final``.  The particle grid holds reflected waves
    (speed at most ``p0 + 6 sigma_p`` on the coupled side) and transmitted
    waves accelerated by pointer momenta up to five standard deviations.
    """
    from .spectral import make_grid

    sigma_p = 1.0 / (2 * sigma)
    sigma_k = 1.0 / (2 * pointer_width)
    v_in = (abs(p0) + 6 * sigma_p) / m
    v_out = math.sqrt(v_in ** 2 + 2 * 5 * sigma_k / m)
    gx = make_grid(n_x, min(x0 - 6 * sigma, -v_in * t_final), v_out * t_final + 6 * sigma)
    length = max(t_final + 16 * pointer_width + 2.0, 0.0)
    gz = make_grid(n_z, -8 * pointer_width - 1.0, -8 * pointer_width - 1.0 + length)
    return gx, gz


def resolution_sweep(E_list, pointer_width_list, m=1.0, x0=-10.0, sigma=2.0,
                     t_factor=2.0, n_x=1024, n_z=512):
    """Clock record versus particle energy and pointer width.

    Each row runs the two-body clock for a packet of mean kinetic energy
    ``E`` (``p0 = sqrt(2 m E)``) starting at ``x0`` and a pointer of width
    ``delta_z``, up to ``t_factor`` times the classical arrival time.
    ``relative_blur`` is the final record spread over the spread expected
    classically (pointer width and arrival-time spread in quadrature).
    """
    rows = []
    for E in E_list:
        for dz in pointer_width_list:
            if not E > 0 or not dz > 0:
                raise ConfigurationError("energies and pointer widths must be positive",
                                         field="E" if not E > 0 else "pointer_width")
            p0 = math.sqrt(2 * m * E)
            t_cl = m * abs(x0) / p0
            t_final = t_factor * t_cl
            gx, gz = sweep_grids(m, x0, sigma, p0, dz, t_final, n_x, n_z)
            run = theta_clock_run(m, x0, p0, sigma, dz, gx, gz, t_final)
            sigma_p = 1.0 / (2 * sigma)
            t_spread = math.hypot(m * abs(x0) * sigma_p / p0 ** 2, m * sigma / p0)
            expected = math.hypot(run["initial"]["spread"], t_spread)
            rows.append({
                "E": E, "delta_z": dz, "p0": p0, "E_dz": E * dz,
                "t_classical": t_cl, "t_final": t_final,
                "record_shift": run["final"]["mean"] - run["initial"]["mean"],
                "record_spread": run["final"]["spread"],
                "initial_spread": run["initial"]["spread"],
                "classical_spread": expected,
                "relative_blur": run["final"]["spread"] / expected,
                "dt": run["dt"], "n_steps": run["n_steps"],
            })
    return rows
