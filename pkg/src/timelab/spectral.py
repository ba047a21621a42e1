"""Uniform grids, position/momentum transforms and basic quadratures.

Units are hbar = 1 throughout.  Momentum samples sit on the half-bin
offset lattice ``p_k = (k - n/2 + 1/2) dp`` so that ``p = 0`` is never
sampled; the price is that the position representation is antiperiodic
over one box length, which is irrelevant for states localized well inside
the box.

Norms use the periodic trapezoid rule, which on a uniform periodic grid
is the plain sum times the cell width.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .errors import ConfigurationError, GeneralizedStateError, ShapeError

POSITION = "position"
MOMENTUM = "momentum"
_BASES = (POSITION, MOMENTUM)


@dataclass(frozen=True)
class Grid1D:
    n_points: int
    x_min: float
    x_max: float

    def __post_init__(self):
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ConfigurationError(
                f"n_points must be a power of two >= 8, got {n!r}", field="n_points")
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)) or self.x_max <= self.x_min:
            raise ConfigurationError(
                f"degenerate extent [{self.x_min}, {self.x_max}]", field="x_max")

    @property
    def length(self):
        return float(self.x_max - self.x_min)

    @property
    def dx(self):
        return self.length / self.n_points

    @property
    def dp(self):
        return 2.0 * np.pi / (self.n_points * self.dx)

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def p(self):
        return (np.arange(self.n_points) - self.n_points / 2 + 0.5) * self.dp

    @property
    def p_max(self):
        return (self.n_points / 2 - 0.5) * self.dp

    def measure(self, basis):
        return self.dx if basis == POSITION else self.dp

    def samples(self, basis):
        return self.x if basis == POSITION else self.p


def make_grid(n_points, x_min, x_max):
    """Build a :class:`Grid1D`; raises ``ConfigurationError`` on bad input."""
    return Grid1D(int(n_points) if float(n_points).is_integer() else n_points,
                  float(x_min), float(x_max))


def _check_basis(basis):
    if basis not in _BASES:
        raise ConfigurationError(f"unknown basis {basis!r}", field="basis")


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


# Array-level transforms.  Both are exactly unitary with respect to the
# dx / dp measures because dp * dx * n = 2 pi.

def _phases(grid):
    n = grid.n_points
    c = -n / 2 + 0.5
    pre = np.exp(-2j * np.pi * c * np.arange(n) / n)
    post = np.exp(-1j * grid.p * grid.x_min)
    return pre, post


def position_to_momentum(a, grid, axis=-1):
    pre, post = _phases(grid)
    shape = [1] * np.ndim(a)
    shape[axis] = grid.n_points
    out = scipy.fft.fft(a * pre.reshape(shape), axis=axis)
    return out * (post.reshape(shape) * (grid.dx / np.sqrt(2 * np.pi)))


def momentum_to_position(a, grid, axis=-1):
    pre, post = _phases(grid)
    shape = [1] * np.ndim(a)
    shape[axis] = grid.n_points
    out = scipy.fft.ifft(a * post.conj().reshape(shape), axis=axis)
    return out * (pre.conj().reshape(shape) * (grid.n_points * grid.dp / np.sqrt(2 * np.pi)))


def _convert(a, grid, src, dst, axis=-1):
    if src == dst:
        return a
    if dst == MOMENTUM:
        return position_to_momentum(a, grid, axis)
    return momentum_to_position(a, grid, axis)


@dataclass(frozen=True)
class WaveState:
    """Complex amplitudes of a 1-D pure state on ``grid`` in ``basis``.

    ``generalized`` marks non-normalizable objects such as arrival-time
    eigenfunctions; operations that need a normalized state reject them.
    """

    grid: Grid1D
    basis: str
    amplitudes: np.ndarray
    generalized: bool = False

    def __post_init__(self):
        _check_basis(self.basis)
        a = _frozen(self.amplitudes)
        if a.shape != (self.grid.n_points,):
            raise ShapeError(
                f"amplitudes shape {a.shape} does not match grid ({self.grid.n_points},)")
        object.__setattr__(self, "amplitudes", a)

    @property
    def samples(self):
        return self.grid.samples(self.basis)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.measure(self.basis)))

    def normalize(self):
        nrm = self.norm()
        if nrm == 0.0:
            raise ConfigurationError("cannot normalize the zero state")
        return WaveState(self.grid, self.basis, self.amplitudes / nrm)

    def to(self, basis):
        return transform(self, basis)

    def density(self):
        return np.abs(self.amplitudes) ** 2

    def require_normalizable(self):
        if self.generalized:
            raise GeneralizedStateError("operation requires a normalizable state")


def transform(psi, target_basis):
    """Change representation with the unitary half-bin-offset DFT."""
    _check_basis(target_basis)
    if psi.basis == target_basis:
        return psi
    amps = _convert(psi.amplitudes, psi.grid, psi.basis, target_basis)
    return WaveState(psi.grid, target_basis, amps, psi.generalized)


def inner_product(phi, psi):
    """``<phi|psi>``, conjugate-linear in ``phi``.

    Bases are aligned by transforming ``psi`` when they differ.
    """
    if phi.grid != psi.grid:
        raise ShapeError("inner product of states on different grids")
    psi = transform(psi, phi.basis)
    return complex(np.vdot(phi.amplitudes, psi.amplitudes) * phi.grid.measure(phi.basis))


def expectation(psi, observable, m=None):
    """Expectation value of ``'x'``, ``'p'`` or ``'kinetic'`` (needs ``m``).

    The result is divided by the squared norm, so slightly unnormalized
    input is tolerated.
    """
    psi.require_normalizable()
    if observable == "x":
        s = transform(psi, POSITION)
        w = s.grid.x
    elif observable == "p":
        s = transform(psi, MOMENTUM)
        w = s.grid.p
    elif observable == "kinetic":
        if m is None or not m > 0:
            raise ConfigurationError(f"mass must be positive, got {m!r}", field="m")
        s = transform(psi, MOMENTUM)
        w = s.grid.p ** 2 / (2.0 * m)
    else:
        raise ConfigurationError(f"unknown observable {observable!r}", field="observable")
    rho = s.density()
    return float(np.sum(w * rho) / np.sum(rho))


def spread(psi, observable="x"):
    """Standard deviation of position or momentum."""
    psi.require_normalizable()
    basis = POSITION if observable == "x" else MOMENTUM
    s = transform(psi, basis)
    w = s.samples
    rho = s.density() / np.sum(s.density())
    mean = np.sum(w * rho)
    return float(np.sqrt(np.sum((w - mean) ** 2 * rho)))


@dataclass(frozen=True)
class TwoBodyState:
    """Amplitudes on the product grid (particle x) x (pointer z).

    Stored as a 2-D array of shape ``(n_z, n_x)``; flattening it row-major
    gives the x-fastest layout.  Each axis carries its own basis tag.
    """

    grid_x: Grid1D
    grid_z: Grid1D
    basis_x: str
    basis_z: str
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_basis(self.basis_x)
        _check_basis(self.basis_z)
        a = np.asarray(self.amplitudes, dtype=complex)
        expected = (self.grid_z.n_points, self.grid_x.n_points)
        if a.size != expected[0] * expected[1]:
            raise ShapeError(f"amplitude count {a.size} does not match grids {expected}")
        object.__setattr__(self, "amplitudes", _frozen(a.reshape(expected)))

    @classmethod
    def product(cls, particle, pointer):
        """Tensor product of a particle state and a pointer state."""
        amps = np.outer(pointer.amplitudes, particle.amplitudes)
        return cls(particle.grid, pointer.grid, particle.basis, pointer.basis, amps)

    @property
    def flat(self):
        return self.amplitudes.ravel()

    def _cell(self):
        return self.grid_x.measure(self.basis_x) * self.grid_z.measure(self.basis_z)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self._cell()))

    def normalize(self):
        return TwoBodyState(self.grid_x, self.grid_z, self.basis_x, self.basis_z,
                            self.amplitudes / self.norm())

    def to(self, basis_x=None, basis_z=None):
        bx = basis_x or self.basis_x
        bz = basis_z or self.basis_z
        a = _convert(self.amplitudes, self.grid_x, self.basis_x, bx, axis=1)
        a = _convert(a, self.grid_z, self.basis_z, bz, axis=0)
        return TwoBodyState(self.grid_x, self.grid_z, bx, bz, a)
