"""Phase points, observables, interaction profiles and clock-pointer models.

A model lists its canonical pairs by coordinate label; state vectors are laid
out as ``[q1, p1, q2, p2, ...]`` in that order.  Models whose interaction
profile ``g`` has jumps are integrated piecewise: ``piece`` indexes the
interval between consecutive discontinuities of ``g`` on the clock
coordinate, and the right-hand side uses the constant value of ``g`` on that
piece so that a step can be continued smoothly past a jump while the event
is being located.
"""
import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, TurningPointError

MOMENTUM_LABELS = {"x": "P_x", "y": "P_y", "z": "P_z", "q": "p", "t": "p_t"}


@dataclass(frozen=True)
class PhasePoint:
    """Values of labelled canonical pairs, ``{label: (coordinate, momentum)}``."""

    pairs: dict

    def __post_init__(self):
        clean = {}
        for label, (q, p) in dict(self.pairs).items():
            if label not in MOMENTUM_LABELS:
                raise ConfigurationError(f"unknown canonical pair {label!r}", field="pairs")
            clean[label] = (float(q), float(p))
        object.__setattr__(self, "pairs", clean)

    @classmethod
    def from_vector(cls, labels, vec):
        return cls({lab: (vec[2 * i], vec[2 * i + 1]) for i, lab in enumerate(labels)})

    def vector(self, labels):
        missing = [lab for lab in labels if lab not in self.pairs]
        if missing:
            raise ConfigurationError(f"phase point lacks pairs {missing}", field="start")
        return np.array([v for lab in labels for v in self.pairs[lab]])

    def __getitem__(self, name):
        for lab, (q, p) in self.pairs.items():
            if name == lab:
                return q
            if name == MOMENTUM_LABELS[lab]:
                return p
        raise KeyError(name)

    def replace(self, **values):
        pairs = dict(self.pairs)
        for name, v in values.items():
            for lab, (q, p) in pairs.items():
                if name == lab:
                    pairs[lab] = (v, p)
                    break
                if name == MOMENTUM_LABELS[lab]:
                    pairs[lab] = (q, v)
                    break
            else:
                raise KeyError(name)
        return PhasePoint(pairs)


# ---------------------------------------------------------------- observables

@dataclass(frozen=True)
class Observable:
    """Phase-space function ``A(q, p)`` with gradient and exact flow.

    ``kind`` is one of ``kinetic``, ``harmonic``, ``position``, ``momentum``
    or ``arrival_time``; ``arrival_time`` is ``(q - q0) m / p``.
    """

    kind: str
    m: float = 1.0
    omega: float = 1.0
    q0: float = 0.0

    def __post_init__(self):
        if self.kind not in ("kinetic", "harmonic", "position", "momentum", "arrival_time"):
            raise ConfigurationError(f"unknown observable {self.kind!r}", field="kind")
        if not self.m > 0:
            raise ConfigurationError(f"mass must be positive, got {self.m!r}", field="m")

    def __call__(self, q, p):
        k = self.kind
        if k == "kinetic":
            return p * p / (2 * self.m)
        if k == "harmonic":
            return p * p / (2 * self.m) + 0.5 * self.m * self.omega ** 2 * q * q
        if k == "position":
            return q
        if k == "momentum":
            return p
        return (q - self.q0) * self.m / p

    def grad(self, q, p):
        """``(dA/dq, dA/dp)``."""
        k = self.kind
        if k == "kinetic":
            return 0.0, p / self.m
        if k == "harmonic":
            return self.m * self.omega ** 2 * q, p / self.m
        if k == "position":
            return 1.0, 0.0
        if k == "momentum":
            return 0.0, 1.0
        return self.m / p, -(q - self.q0) * self.m / (p * p)

    @property
    def separable(self):
        return self.kind in ("kinetic", "harmonic", "position", "momentum")

    def force(self, q):
        """``-dV/dq`` for the separable split ``A = T(p) + V(q)``."""
        return -self.grad(q, 1.0)[0] if self.kind in ("harmonic", "position") else 0.0

    def velocity(self, p):
        """``dT/dp`` for the separable split."""
        return self.grad(0.0, p)[1] if self.kind in ("kinetic", "harmonic", "momentum") else 0.0

    def flow(self, q, p, s):
        """Exact Hamiltonian flow of ``A`` for parameter length ``s``."""
        k = self.kind
        if k == "kinetic":
            return q + s * p / self.m, p
        if k == "harmonic":
            w = self.omega
            c, sn = math.cos(w * s), math.sin(w * s)
            return q * c + p * sn / (self.m * w), p * c - self.m * w * q * sn
        if k == "position":
            return q, p - s
        if k == "momentum":
            return q + s, p
        # A is conserved along its own flow; dp/ds = -m/p
        radicand = p * p - 2 * self.m * s
        if radicand <= 0:
            raise TurningPointError(f"arrival-time flow reaches p = 0 (p^2 - 2ms = {radicand:.3g})")
        p_new = math.copysign(math.sqrt(radicand), p)
        return self.q0 + self(q, p) * p_new / self.m, p_new


def kinetic(m=1.0):
    return Observable("kinetic", m=m)


def harmonic(m=1.0, omega=1.0):
    return Observable("harmonic", m=m, omega=omega)


def position():
    return Observable("position")


def momentum():
    return Observable("momentum")


def arrival_time(m=1.0, q0=0.0):
    return Observable("arrival_time", m=m, q0=q0)


def kick_vector(labels, y, A, lam, system=None, pointer="y"):
    """Time-one flow of ``lam * A(q, p) * P_y`` on a state vector.

    ``A`` is conserved along its own flow, so the pointer jumps by exactly
    ``lam * A``; the system follows the flow of ``A`` for parameter length
    ``lam * P_y``.
    """
    labels = list(labels)
    system = labels[0] if system is None else system
    i, j = 2 * labels.index(system), 2 * labels.index(pointer)
    out = np.array(y, dtype=float)
    q, p, py = out[i], out[i + 1], out[j + 1]
    out[j] += lam * A(q, p)
    out[i], out[i + 1] = A.flow(q, p, lam * py)
    return out


# ---------------------------------------------------------------- couplings

def _bump_shape(u):
    # C-infinity profile on (-1, 1)
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def _bump_shape_derivative(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    v = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - v ** 2)) * (-2 * v / (1.0 - v ** 2) ** 2)
    return out


def _bump_norm():
    from .quadrature import integrate_function
    return integrate_function(_bump_shape, -1.0, 1.0, n_panels=256)


_BUMP_NORM = _bump_norm()


@dataclass(frozen=True)
class CouplingFunction:
    """Interaction profile ``g`` of the clock coordinate.

    Use :func:`step`, :func:`box`, :func:`bump` or :func:`tabulated`.
    ``params`` holds ``(x0,)`` for box, ``(width, center)`` for bump and
    ``(nodes, values)`` for tabulated profiles.
    """

    kind: str
    params: tuple = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k == "step":
            return np.where(x < 0, 1.0, 0.0)
        if k == "box":
            (x0,) = self.params
            return np.where((x >= 0) & (x <= x0), 1.0 / x0, 0.0)
        if k == "bump":
            width, center = self.params
            return _bump_shape(2 * (x - center) / width) * (2.0 / (width * _BUMP_NORM))
        if k == "zero":
            return np.zeros_like(x)
        nodes, values = self.params
        return np.interp(x, nodes, values, left=0.0, right=0.0)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k in ("step", "box", "zero"):
            return np.zeros_like(x)
        if k == "bump":
            width, center = self.params
            return _bump_shape_derivative(2 * (x - center) / width) * (4.0 / (width ** 2 * _BUMP_NORM))
        nodes, values = np.asarray(self.params[0]), np.asarray(self.params[1])
        slopes = np.diff(values) / np.diff(nodes)
        idx = np.searchsorted(nodes, x, side="right") - 1
        inside = (idx >= 0) & (idx < slopes.size)
        return np.where(inside, slopes[np.clip(idx, 0, slopes.size - 1)], 0.0)

    @property
    def discontinuities(self):
        """Clock positions where ``g`` jumps."""
        if self.kind == "step":
            return (0.0,)
        if self.kind == "box":
            return (0.0, float(self.params[0]))
        return ()

    @property
    def breakpoints(self):
        """Points where ``g`` or one of its derivatives is not smooth."""
        if self.kind == "bump":
            width, center = self.params
            return (center - width / 2, center + width / 2)
        if self.kind == "tabulated":
            return tuple(float(v) for v in self.params[0])
        return self.discontinuities

    def piece_value(self, piece):
        """Constant value of a piecewise-constant profile on ``piece``."""
        if self.kind == "step":
            return 1.0 if piece == 0 else 0.0
        if self.kind == "box":
            return 1.0 / self.params[0] if piece == 1 else 0.0
        raise ConfigurationError(f"{self.kind} profile is not piecewise constant", field="g")

    def value(self, x, piece):
        return self.piece_value(piece) if self.discontinuities else float(self(x))

    def slope(self, x, piece):
        return 0.0 if self.discontinuities else float(self.derivative(x))

    def piece_of(self, x, direction=1.0):
        """Index of the interval holding ``x``; ties go the way of ``direction``."""
        d = self.discontinuities
        return bisect.bisect_right(d, x) if direction >= 0 else bisect.bisect_left(d, x)

    def integral(self, a, b):
        from .quadrature import integrate_function
        return integrate_function(lambda x: self(x), a, b, self.breakpoints)


def step():
    """``Theta(-x)``."""
    return CouplingFunction("step")


def box(x0):
    """Height ``1/x0`` on ``[0, x0]``."""
    if not x0 > 0:
        raise ConfigurationError(f"box length must be positive, got {x0!r}", field="x0")
    return CouplingFunction("box", (float(x0),))


def bump(width, center=None):
    """Smooth compact unit-integral profile supported on ``center +- width/2``.

    ``center`` defaults to ``width / 2`` so the support is ``[0, width]``.
    """
    if not width > 0:
        raise ConfigurationError(f"bump width must be positive, got {width!r}", field="width")
    return CouplingFunction("bump", (float(width), float(width / 2 if center is None else center)))


def tabulated(nodes, values):
    """Piecewise-linear profile through ``(nodes, values)``, zero outside."""
    nodes = tuple(float(v) for v in nodes)
    values = tuple(float(v) for v in values)
    if len(nodes) != len(values) or len(nodes) < 2:
        raise ConfigurationError("tabulated profile needs matching node and value lists", field="g")
    if any(b <= a for a, b in zip(nodes, nodes[1:])):
        raise ConfigurationError("tabulated nodes must increase", field="g")
    if not all(math.isfinite(v) for v in values):
        raise ConfigurationError("tabulated values must be finite", field="g")
    return CouplingFunction("tabulated", (nodes, values))


def zero():
    """``g = 0``."""
    return CouplingFunction("zero")


# ---------------------------------------------------------------- models

def _inv(M):
    return 0.0 if math.isinf(M) else 1.0 / M


def _check_masses(**masses):
    for name, v in masses.items():
        if not v > 0:
            raise ConfigurationError(f"{name} must be positive, got {v!r}", field=name)


class _Model:
    """Shared behaviour; subclasses are frozen dataclasses."""

    pairs = ()
    clock = None
    separable = False
    kicks = ()

    @property
    def coupling(self):
        return None

    @property
    def discontinuities(self):
        g = self.coupling
        return g.discontinuities if g is not None else ()

    def piece_of(self, y, direction=1.0):
        g = self.coupling
        if g is None or not g.discontinuities:
            return 0
        return g.piece_of(y[2 * self.clock], direction)

    def clock_velocity(self, y, piece):
        return self.rhs(y, piece)[2 * self.clock]

    def jump(self, y, old, new):
        """State after crossing from piece ``old`` to ``new``.

        Conserves the Hamiltonian by adjusting the clock momentum; if that
        is impossible the clock momentum reverses and the piece is kept.
        """
        raise NotImplementedError


@dataclass(frozen=True)
class SystemOnly(_Model):
    """Uncoupled system ``H = H0(q, p)``."""

    H0: Observable
    pairs = ("q",)

    def rhs(self, y, piece=0):
        dq, dp = self.H0.grad(y[0], y[1])
        return np.array([dp, -dq])

    def hamiltonian(self, y, piece=0):
        return float(self.H0(y[0], y[1]))

    @property
    def separable(self):
        return self.H0.separable

    def drift(self, y, h):
        return y + h * np.array([self.H0.velocity(y[1]), 0.0])

    def kick(self, y, h):
        return y + h * np.array([0.0, self.H0.force(y[0])])


@dataclass(frozen=True)
class InstantKick(_Model):
    """``H = H0(q, p) + P_y^2/2M + delta(t - t0) A(q, p) P_y``."""

    H0: Observable
    A: Observable
    t0: float
    lam: float = 1.0
    M: float = math.inf
    pairs = ("q", "y")

    def __post_init__(self):
        _check_masses(M=self.M)

    @property
    def kicks(self):
        return ((self.t0, self.A, self.lam),)

    def rhs(self, y, piece=0):
        dq, dp = self.H0.grad(y[0], y[1])
        return np.array([dp, -dq, y[3] * _inv(self.M), 0.0])

    def hamiltonian(self, y, piece=0):
        return float(self.H0(y[0], y[1]) + 0.5 * y[3] ** 2 * _inv(self.M))

    @property
    def separable(self):
        return self.H0.separable

    def drift(self, y, h):
        return y + h * np.array([self.H0.velocity(y[1]), 0.0, y[3] * _inv(self.M), 0.0])

    def kick(self, y, h):
        return y + h * np.array([0.0, self.H0.force(y[0]), 0.0, 0.0])


@dataclass(frozen=True)
class GeneralCoupling(_Model):
    """``H = P_x^2/2m + P_y^2/2M + g(x) P_y``."""

    m: float = 1.0
    M: float = math.inf
    g: CouplingFunction = field(default_factory=step)
    pairs = ("x", "y")
    clock = 0

    def __post_init__(self):
        _check_masses(m=self.m, M=self.M)

    @property
    def coupling(self):
        return self.g

    def rhs(self, y, piece=0):
        x, px, _, py = y
        return np.array([px / self.m, -self.g.slope(x, piece) * py,
                         py * _inv(self.M) + self.g.value(x, piece), 0.0])

    def hamiltonian(self, y, piece=None):
        x, px, _, py = y
        gv = float(self.g(x)) if piece is None else self.g.value(x, piece)
        return float(px ** 2 / (2 * self.m) + 0.5 * py ** 2 * _inv(self.M) + gv * py)

    @property
    def separable(self):
        return not self.g.discontinuities

    def drift(self, y, h):
        return y + h * np.array([y[1] / self.m, 0.0, y[3] * _inv(self.M), 0.0])

    def kick(self, y, h):
        # exact flow of g(x) P_y: x and P_y are frozen
        x, _, _, py = y
        return y + h * np.array([0.0, -float(self.g.derivative(x)) * py, float(self.g(x)), 0.0])

    def jump(self, y, old, new):
        radicand = y[1] ** 2 + 2 * self.m * (self.g.piece_value(old) - self.g.piece_value(new)) * y[3]
        return _clock_jump(y, radicand, old, new, self.clock)


@dataclass(frozen=True)
class ThetaClock(GeneralCoupling):
    """``H = P_x^2/2m + P_y^2/2M + Theta(-x) P_y``."""

    def __post_init__(self):
        super().__post_init__()
        if self.g.kind != "step":
            raise ConfigurationError("ThetaClock uses the step profile", field="g")


@dataclass(frozen=True)
class InternalObservable(_Model):
    """``H = H0(q, p) + P_y^2/2M + P_x^2/2m + g(x) A(q, p) P_y``."""

    H0: Observable
    A: Observable
    g: CouplingFunction
    m: float = 1.0
    M: float = math.inf
    pairs = ("q", "x", "y")
    clock = 1

    def __post_init__(self):
        _check_masses(m=self.m, M=self.M)

    @property
    def coupling(self):
        return self.g

    def rhs(self, y, piece=0):
        q, p, x, px, _, py = y
        h0q, h0p = self.H0.grad(q, p)
        aq, ap = self.A.grad(q, p)
        gv = self.g.value(x, piece)
        a = self.A(q, p)
        return np.array([h0p + gv * py * ap, -h0q - gv * py * aq,
                         px / self.m, -self.g.slope(x, piece) * a * py,
                         py * _inv(self.M) + gv * a, 0.0])

    def hamiltonian(self, y, piece=None):
        q, p, x, px, _, py = y
        gv = float(self.g(x)) if piece is None else self.g.value(x, piece)
        return float(self.H0(q, p) + 0.5 * py ** 2 * _inv(self.M)
                     + px ** 2 / (2 * self.m) + gv * self.A(q, p) * py)

    def jump(self, y, old, new):
        a = self.A(y[0], y[1])
        radicand = y[3] ** 2 + 2 * self.m * (self.g.piece_value(old) - self.g.piece_value(new)) * a * y[5]
        return _clock_jump(y, radicand, old, new, self.clock)


@dataclass(frozen=True)
class TotalEnergyIdeal(_Model):
    """Ideal clock, infinitely massive pointer: ``H = (H0 + P_x)(1 + g(x) z)``.

    ``H0`` is the conserved box energy; ``z0`` is the pointer position.
    """

    H_box0: float
    g: CouplingFunction
    z0: float = 0.0
    pairs = ("x", "z")
    clock = 0

    @property
    def coupling(self):
        return self.g

    def rhs(self, y, piece=0):
        x, px, z, _ = y
        gv = self.g.value(x, piece)
        e = self.H_box0 + px
        return np.array([1 + gv * z, -self.g.slope(x, piece) * z * e, 0.0, -gv * e])

    def hamiltonian(self, y, piece=None):
        x, px, z, _ = y
        gv = float(self.g(x)) if piece is None else self.g.value(x, piece)
        return float((self.H_box0 + px) * (1 + gv * z))

    def start(self, P_x, x_start):
        return PhasePoint({"x": (x_start, P_x), "z": (self.z0, 0.0)})

    def jump(self, y, old, new):
        z = y[2]
        go, gn = self.g.piece_value(old), self.g.piece_value(new)
        out = y.copy()
        out[1] = (self.H_box0 + y[1]) * (1 + go * z) / (1 + gn * z) - self.H_box0
        return out, new, False


@dataclass(frozen=True)
class TotalEnergyReal(_Model):
    """Real clock, infinitely massive pointer: ``H = (H0 + P_x^2/2m)(1 + g(x) z)``."""

    m: float
    H_box0: float
    g: CouplingFunction
    z0: float = 0.0
    pairs = ("x", "z")
    clock = 0

    def __post_init__(self):
        _check_masses(m=self.m)

    @property
    def coupling(self):
        return self.g

    def rhs(self, y, piece=0):
        x, px, z, _ = y
        gv = self.g.value(x, piece)
        e = self.H_box0 + px ** 2 / (2 * self.m)
        return np.array([px / self.m * (1 + gv * z), -self.g.slope(x, piece) * z * e,
                         0.0, -gv * e])

    def hamiltonian(self, y, piece=None):
        x, px, z, _ = y
        gv = float(self.g(x)) if piece is None else self.g.value(x, piece)
        return float((self.H_box0 + px ** 2 / (2 * self.m)) * (1 + gv * z))

    def start(self, P_x, x_start):
        return PhasePoint({"x": (x_start, P_x), "z": (self.z0, 0.0)})

    def jump(self, y, old, new):
        z = y[2]
        go, gn = self.g.piece_value(old), self.g.piece_value(new)
        e_new = (self.H_box0 + y[1] ** 2 / (2 * self.m)) * (1 + go * z) / (1 + gn * z)
        radicand = 2 * self.m * (e_new - self.H_box0)
        return _clock_jump(y, radicand, old, new, self.clock)


def _clock_jump(y, radicand, old, new, clock):
    out = y.copy()
    i = 2 * clock + 1
    if radicand < 0:
        out[i] = -y[i]
        return out, old, True
    out[i] = math.copysign(math.sqrt(radicand), y[i])
    return out, new, False
