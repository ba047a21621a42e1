"""Fixed-step integration of the classical models.

``rk4`` and ``verlet`` take uniform steps; ``event_rk4`` additionally
watches the clock coordinate for the jumps of a piecewise-constant profile,
locates each crossing by bisection on the step length, applies the
energy-conserving momentum jump and restarts from the event.  Instantaneous
kicks are applied at their exact instants by all methods.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..errors import ConfigurationError, MethodError
from .models import MOMENTUM_LABELS, PhasePoint, kick_vector

EVENT_TOL = 1e-12
METHODS = ("rk4", "verlet", "event_rk4")


class Event(NamedTuple):
    kind: str
    param: float


@dataclass(frozen=True)
class Trajectory:
    """Sampled phase-space path.

    ``states[i]`` is the state vector (layout ``[q1, p1, q2, p2, ...]`` over
    ``labels``) at parameter ``params[i]``.  At an event the sample holds
    the state just after the jump or kick.
    """

    param_name: str
    params: np.ndarray
    labels: tuple
    states: np.ndarray
    energy: np.ndarray
    events: list = field(default_factory=list)

    @property
    def columns(self):
        return [name for lab in self.labels for name in (lab, MOMENTUM_LABELS[lab])]

    def column(self, name):
        if name == self.param_name:
            return self.params
        return self.states[:, self.columns.index(name)]

    def point(self, i):
        return PhasePoint.from_vector(self.labels, self.states[i])

    @property
    def final(self):
        return self.point(-1)

    def event_params(self, kind):
        return [e.param for e in self.events if e.kind == kind]


def _rk4_step(model, y, h, piece):
    k1 = model.rhs(y, piece)
    k2 = model.rhs(y + 0.5 * h * k1, piece)
    k3 = model.rhs(y + 0.5 * h * k2, piece)
    k4 = model.rhs(y + h * k3, piece)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _verlet_step(model, y, h, piece):
    y = model.kick(y, 0.5 * h)
    y = model.drift(y, h)
    return model.kick(y, 0.5 * h)


def _apply_kick(model, y, A, lam):
    return kick_vector(model.pairs, y, A, lam)


def _crossing(model, y, h, piece):
    """Earliest discontinuity crossed by a step of length ``h``, or None.

    Returns ``(s, index)`` with ``s`` the step length that first puts the
    clock coordinate on the far side of discontinuity ``index``.
    """
    d = model.discontinuities
    if not d:
        return None
    i = 2 * model.clock
    x0 = y[i]
    x1 = _rk4_step(model, y, h, piece)[i]
    # only the boundaries of the current piece can be crossed first
    candidates = [k for k in (piece - 1, piece) if 0 <= k < len(d)]
    best = None
    for k in candidates:
        side0 = x0 - d[k]
        side1 = x1 - d[k]
        if side0 == 0 or np.sign(side0) == np.sign(side1):
            continue
        lo, hi = 0.0, h
        while hi - lo > EVENT_TOL:
            mid = 0.5 * (lo + hi)
            xm = _rk4_step(model, y, mid, piece)[i]
            if np.sign(xm - d[k]) == np.sign(side0):
                lo = mid
            else:
                hi = mid
        if best is None or hi < best[0]:
            best = (hi, k)
    return best


def integrate(model, start, span, dt, method="rk4"):
    """Integrate ``model`` from ``start`` over the time interval ``span``.

    Parameters
    ----------
    model : classical model instance
    start : PhasePoint
    span : (t0, t1) with t1 > t0
    dt : float
        Nominal step.  Steps are shortened to land on kick instants, events
        and the end of the span.
    method : {'rk4', 'verlet', 'event_rk4'}

    Returns
    -------
    Trajectory
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown method {method!r}", field="method")
    t0, t1 = map(float, span)
    if not t1 > t0:
        raise ConfigurationError(f"span must increase, got {span!r}", field="span")
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt!r}", field="dt")
    if model.discontinuities and method != "event_rk4":
        raise MethodError(f"{type(model).__name__} with a jump profile requires event_rk4")
    if method == "verlet" and not model.separable:
        raise MethodError(f"verlet needs a separable Hamiltonian; {type(model).__name__} is not")
    stepper = _verlet_step if method == "verlet" else _rk4_step

    y = start.vector(model.pairs)
    piece = model.piece_of(y, model.clock_velocity(y, 0) if model.discontinuities else 1.0)
    kicks = sorted(k for k in model.kicks if t0 <= k[0] <= t1)
    times, states, energy, events = [t0], [y], [model.hamiltonian(y, piece)], []

    t = t0
    n_max = int(np.ceil((t1 - t0) / dt)) * 4 + 1000
    while t < t1:
        if len(times) > n_max:
            raise MethodError("step budget exhausted; events are accumulating")
        if kicks and kicks[0][0] <= t:
            tk, A, lam = kicks.pop(0)
            y = _apply_kick(model, y, A, lam)
            events.append(Event("kick", tk))
            states[-1] = y
            energy[-1] = model.hamiltonian(y, piece)
            continue
        h = min(dt, t1 - t)
        if kicks:
            h = min(h, kicks[0][0] - t)
        hit = _crossing(model, y, h, piece) if method == "event_rk4" else None
        if hit is not None:
            s, k = hit
            y = _rk4_step(model, y, s, piece)
            t = t + s
            new = k + 1 if piece == k else k
            y, piece, reflected = model.jump(y, piece, new)
            if reflected:
                # bisection stops just past the wall; sit on it so the
                # reversed motion starts inside the original piece
                y[2 * model.clock] = model.discontinuities[k]
            events.append(Event("reflection" if reflected else
                                ("crossing" if model.discontinuities[k] == 0 else "boundary"), t))
        else:
            y = stepper(model, y, h, piece)
            # land exactly on the end of the span and on kick instants
            t = t1 if h == t1 - t else (kicks[0][0] if kicks and h == kicks[0][0] - t else t + h)
        times.append(t)
        states.append(y)
        energy.append(model.hamiltonian(y, piece))
    if kicks and kicks[0][0] <= t1:
        tk, A, lam = kicks.pop(0)
        y = _apply_kick(model, y, A, lam)
        events.append(Event("kick", tk))
        states[-1] = y
        energy[-1] = model.hamiltonian(y, piece)
    return Trajectory("t", np.array(times), tuple(model.pairs), np.array(states),
                      np.array(energy), events)
