"""Pointer records, internal-time quadratures and good-measurement margins."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import (ConfigurationError, MonotonicityError, NoArrivalError,
                      TurningPointError, UndefinedMarginError)
from .integrate import integrate
from .models import GeneralCoupling, InternalObservable, PhasePoint, ThetaClock, kick_vector
from .quadrature import cumulative, integral_at, panel_edges, quadrature_nodes

GOOD_THRESHOLD = 0.1


# ---------------------------------------------------------------- kicks

def classical_kick(state, A, lam, system=None, pointer="y"):
    """Apply an impulsive von Neumann kick to a :class:`PhasePoint`.

    The kick acts at the instant ``state`` describes.  ``system`` names the
    measured pair (default: the first pair that is not the pointer).
    """
    labels = list(state.pairs)
    if pointer not in labels:
        raise ConfigurationError(f"phase point has no pointer pair {pointer!r}", field="pointer")
    if system is None:
        system = next(lab for lab in labels if lab != pointer)
    y = kick_vector(labels, state.vector(labels), A, lam, system, pointer)
    return PhasePoint.from_vector(labels, y)


# ---------------------------------------------------------------- theta clock

def theta_arrival_record(m, x0, P_x0, P_y0=0.0, M=math.inf, dt=None):
    """Pointer record of the sharp-step arrival clock.

    ``P_x0`` is the particle momentum where the coupling vanishes, so
    ``C1 = (P_x0/m)**2``; inside ``x < 0`` the particle moves with
    ``sqrt(P_x0**2 - 2 m P_y0)``.  The record is the pointer displacement
    beyond its free drift ``P_y0 t / M``.

    Returns
    -------
    dict with ``record``, ``relative_error_estimate`` (first-order
    ``P_y0 m / P_x0**2``), ``crossing_time``, ``C1`` and ``trajectory``.
    """
    if not m > 0:
        raise ConfigurationError(f"mass must be positive, got {m!r}", field="m")
    if not x0 < 0:
        raise ConfigurationError(f"x0 must be negative, got {x0!r}", field="x0")
    if not P_x0 > 0:
        raise NoArrivalError(f"particle with P_x0 = {P_x0} never reaches x = 0")
    radicand = P_x0 ** 2 - 2 * m * P_y0
    if radicand <= 0:
        raise NoArrivalError("coupling energy stops the particle before x = 0")
    p_in = math.sqrt(radicand)
    t_cross = m * (-x0) / p_in
    dt = t_cross / 256 if dt is None else dt
    start = PhasePoint({"x": (x0, p_in), "y": (0.0, P_y0)})
    traj = integrate(ThetaClock(m=m, M=M), start, (0.0, 1.25 * t_cross + dt), dt, "event_rk4")
    crossings = traj.event_params("crossing")
    if not crossings:
        raise NoArrivalError("no crossing of x = 0 inside the integration span")
    t_end = traj.params[-1]
    drift = 0.0 if math.isinf(M) else P_y0 / M * t_end
    record = traj.column("y")[-1] - traj.column("y")[0] - drift
    return {"record": float(record), "relative_error_estimate": P_y0 * m / P_x0 ** 2,
            "crossing_time": crossings[0], "C1": (P_x0 / m) ** 2, "trajectory": traj}


# ---------------------------------------------------------------- internal time

def _direction(x_range):
    a, b = map(float, x_range)
    if a == b:
        raise ConfigurationError("empty x range", field="x_range")
    return a, b, (1.0 if b > a else -1.0)


def _inside(points, a, b):
    points = np.asarray(points, dtype=float)
    if np.any(points < min(a, b)) or np.any(points > max(a, b)):
        raise ConfigurationError("evaluation points outside the x range", field="x_eval")
    return points


def _radicand_checked(f, edges, what):
    nodes = np.concatenate([edges, quadrature_nodes(edges)])
    r = f(nodes)
    if np.min(r) <= 0:
        where = nodes[np.argmin(r)]
        raise TurningPointError(f"{what} radicand {np.min(r):.3g} <= 0 near x = {where:.6g}")


def internal_time_map(g, m, P_y0, C1, x_range, n_panels=32, x_eval=None):
    """External time as a function of the clock coordinate.

    ``t(x) = int dx / (+-sqrt(C1 - 2 P_y0 g(x)/m))`` from the start of
    ``x_range``; the sign follows the direction of travel so ``t`` grows.

    Returns
    -------
    dict with sample arrays ``x`` and ``t``; with ``x_eval`` also ``t_eval``,
    the map at those clock positions.
    """
    a, b, sgn = _direction(x_range)

    def radicand(x):
        return C1 - 2 * P_y0 * g(x) / m

    edges = panel_edges(a, b, g.breakpoints, n_panels)
    _radicand_checked(radicand, edges, "internal-time")
    def rate(x):
        return 1.0 / np.sqrt(radicand(x))

    x, t = cumulative(rate, a, b, g.breakpoints, n_panels)
    out = {"x": x, "t": sgn * t}
    if x_eval is not None:
        out["t_eval"] = sgn * integral_at(rate, x, _inside(x_eval, a, b))
    return out


def internal_pointer_curve(model, P_y0, x_range, C1=None, C=None, A_value=None,
                           M=None, n_panels=32, x_eval=None):
    """Pointer position against the clock coordinate.

    For :class:`GeneralCoupling` (``C1`` required)::

        dy/dx = (P_y0/M + g) / (+-sqrt(C1 - 2 P_y0 g/m))

    For :class:`InternalObservable` (``C`` and ``A_value`` required, pointer
    taken infinitely massive)::

        dy/dx = g A / (+-sqrt(C - 2 A P_y0 g/m))

    Returns
    -------
    dict with ``x``, ``dydx`` and ``y`` (``y = 0`` at the start); with
    ``x_eval`` also ``y_eval``.
    """
    a, b, sgn = _direction(x_range)
    g, m = model.g, model.m
    if isinstance(model, InternalObservable):
        if C is None or A_value is None:
            raise ConfigurationError("InternalObservable curve needs C and A_value", field="C")

        def radicand(x):
            return C - 2 * A_value * P_y0 * g(x) / m

        def numerator(x):
            return g(x) * A_value
    elif isinstance(model, GeneralCoupling):
        if C1 is None:
            raise ConfigurationError("GeneralCoupling curve needs C1", field="C1")
        M = model.M if M is None else M
        drift = 0.0 if math.isinf(M) else P_y0 / M

        def radicand(x):
            return C1 - 2 * P_y0 * g(x) / m

        def numerator(x):
            return drift + g(x)
    else:
        raise ConfigurationError(f"no pointer curve for {type(model).__name__}", field="model")

    def slope(x):
        return numerator(x) / (sgn * np.sqrt(radicand(x)))

    edges = panel_edges(a, b, g.breakpoints, n_panels)
    _radicand_checked(radicand, edges, "pointer-curve")
    x, y = cumulative(slope, a, b, g.breakpoints, n_panels)
    out = {"x": x, "dydx": slope(x), "y": sgn * y}
    if x_eval is not None:
        out["y_eval"] = sgn * integral_at(slope, x, _inside(x_eval, a, b))
    return out


# ---------------------------------------------------------------- Arnol'd

def arnold_compare(H1, start, segment, n_samples=257):
    """Max phase-space mismatch between time- and coordinate-parametrized paths.

    On ``p_t + H1(P_x, x) = h`` the momentum is ``P_x = K(x)``, and with
    ``x`` as parameter ``dt/dx = -dK/dp_t = m/K`` and ``dp_t/dx = 0``.
    ``H1`` must be of the form ``P^2/2m + V(x)`` (kinetic or harmonic).
    The reduced path is integrated in ``x``, the canonical one in ``t``;
    the latter is then evaluated at the reduced times.

    Parameters
    ----------
    H1 : Observable
    start : PhasePoint with pair ``x``, or ``(x, P_x)``
    segment : (x_a, x_b); must start at the starting position
    """
    if H1.kind not in ("kinetic", "harmonic"):
        raise ConfigurationError("reduction needs H1 = P^2/2m + V(x)", field="H1")
    x0, p0 = start.pairs["x"] if isinstance(start, PhasePoint) else map(float, start)
    xa, xb = map(float, segment)
    if abs(xa - x0) > 1e-12 * max(1.0, abs(x0)):
        raise ConfigurationError("segment must start at the initial position", field="segment")
    m = H1.m
    h = H1(x0, p0)
    sgn = math.copysign(1.0, p0)
    if p0 == 0 or sgn * (xb - xa) <= 0:
        raise MonotonicityError("the particle does not move towards the segment end")

    def radicand(x):
        return 2 * m * (h - H1(x, 0.0))

    xs = np.linspace(xa, xb, 4097)
    if np.min(radicand(xs)) <= 0:
        raise MonotonicityError("segment contains a turning point")

    def K(x):
        return sgn * np.sqrt(radicand(x))

    x_samples = np.linspace(xa, xb, n_samples)
    # reduced equations in x for (t, p_t)
    red = solve_ivp(lambda x, u: [m / K(x), 0.0], (xa, xb), [0.0, -h],
                    method="DOP853", t_eval=x_samples, rtol=1e-13, atol=1e-15)
    t_of_x = red.y[0]

    def canonical(t, u):
        dq, dp = H1.grad(u[0], u[1])
        return [dp, -dq]

    full = solve_ivp(canonical, (0.0, t_of_x[-1]), [x0, p0], method="DOP853",
                     dense_output=True, rtol=1e-13, atol=1e-15)
    x_t, p_t = full.sol(t_of_x)
    return float(max(np.max(np.abs(x_t - x_samples)), np.max(np.abs(p_t - K(x_samples)))))


# ---------------------------------------------------------------- total energy

def _g_range_check(g, z0, edges):
    nodes = np.concatenate([edges, quadrature_nodes(edges)])
    gz = g(nodes) * z0
    if np.min(1 + gz) <= 0:
        raise ConfigurationError("1 + g(x) z0 must stay positive", field="z0")
    return float(np.max(np.abs(gz)))


def total_energy_ideal(H_box0, P_x, g, z0, x_range, n_panels=32, threshold=GOOD_THRESHOLD):
    """Pointer-momentum record of the ideal-clock total-energy meter.

    Integrates ``dP_z/dx = -g (H0 + C) / (1 + g z0)**2`` with ``C = H - H0``
    fixed from the clock momentum ``P_x`` at the start of ``x_range``.
    """
    a, b = map(float, x_range)
    edges = panel_edges(a, b, g.breakpoints, n_panels)
    margin = _g_range_check(g, z0, edges)
    H = (H_box0 + P_x) * (1 + float(g(a)) * z0)
    C = H - H_box0
    _, F = cumulative(lambda x: -g(x) * (H_box0 + C) / (1 + g(x) * z0) ** 2,
                      a, b, g.breakpoints, n_panels)
    delta = float(F[-1])
    return {"deltaPz": delta, "H": H, "C": C, "margin": margin, "good": margin < threshold,
            "relative_error": abs(delta + H) / abs(H) if H else math.nan}


def total_energy_real(m, H_box0, P_x, g, z0, x_range, n_panels=32, threshold=GOOD_THRESHOLD):
    """Pointer-momentum record of the real (quadratic) clock.

    Integrates::

        dP_z/dx = -g / (1 + g z0)**1.5 * (C + 2 m H0) / (2 sqrt(C - 2 m H0 z0 g))

    with ``C = 2m (H - H0)`` fixed from ``P_x`` at the start of ``x_range``.
    ``velocity_condition`` is ``P_x / m``; the record equals ``-H`` only
    when it is 1.
    """
    if not m > 0:
        raise ConfigurationError(f"mass must be positive, got {m!r}", field="m")
    a, b = map(float, x_range)
    edges = panel_edges(a, b, g.breakpoints, n_panels)
    margin = _g_range_check(g, z0, edges)
    H = (H_box0 + P_x ** 2 / (2 * m)) * (1 + float(g(a)) * z0)
    C = 2 * m * (H - H_box0)

    def radicand(x):
        return C - 2 * m * H_box0 * z0 * g(x)

    _radicand_checked(radicand, edges, "real-clock")
    _, F = cumulative(lambda x: -g(x) / (1 + g(x) * z0) ** 1.5 * (C + 2 * m * H_box0)
                      / (2 * np.sqrt(radicand(x))), a, b, g.breakpoints, n_panels)
    delta = float(F[-1])
    return {"deltaPz": delta, "H": H, "C": C, "margin": margin, "good": margin < threshold,
            "velocity_condition": P_x / m,
            "relative_error": abs(delta + H) / abs(H) if H else math.nan}


# ---------------------------------------------------------------- margins

def _ratio(num, den, name):
    if den == 0 or not math.isfinite(den):
        raise UndefinedMarginError(f"{name}: denominator is {den}")
    return abs(num / den)


_CONDITIONS = {
    # g dP_y0 / (m C1)
    "approximate": (("g", "delta_P_y0", "m", "C1"),
                    lambda g, delta_P_y0, m, C1: (g * delta_P_y0, m * C1)),
    # A P_y0 g / (m C)
    "observable": (("A", "P_y0", "g", "m", "C"),
                   lambda A, P_y0, g, m, C: (A * P_y0 * g, m * C)),
    # dy dP_y0 / (sqrt(C) m x0 dA/A)
    "pointer_product": (("delta_y", "delta_P_y0", "C", "m", "x0", "relative_A_error"),
                        lambda delta_y, delta_P_y0, C, m, x0, relative_A_error:
                        (delta_y * delta_P_y0, math.sqrt(C) * m * x0 * relative_A_error)),
    # g z0
    "ideal_clock": (("g", "z0"), lambda g, z0: (g * z0, 1.0)),
    # dz dP_z / (x0 H)
    "energy_product": (("delta_z", "delta_P_z", "x0", "H"),
                       lambda delta_z, delta_P_z, x0, H: (delta_z * delta_P_z, x0 * H)),
}


@dataclass(frozen=True)
class MeasurementReport:
    """Dimensionless good-measurement margins and their verdicts."""

    margins: dict
    good: dict
    threshold: float = GOOD_THRESHOLD
    record: float = None
    conventions: dict = field(default_factory=dict)

    @property
    def all_good(self):
        return all(self.good.values())


def measurement_margins(conditions, threshold=GOOD_THRESHOLD, record=None, conventions=None):
    """Evaluate good-measurement margins.

    Parameters
    ----------
    conditions : dict
        Maps a condition name (``approximate``, ``observable``,
        ``pointer_product``, ``ideal_clock``, ``energy_product``) to its
        inputs, e.g. ``{"ideal_clock": {"g": 1.0, "z0": 0.05}}``.
    threshold : float
        A margin below this counts as good.
    """
    if not threshold > 0:
        raise ConfigurationError(f"threshold must be positive, got {threshold!r}", field="threshold")
    margins, good = {}, {}
    for name, inputs in conditions.items():
        if name not in _CONDITIONS:
            raise ConfigurationError(f"unknown margin {name!r}", field=name)
        keys, fn = _CONDITIONS[name]
        missing = [k for k in keys if k not in inputs]
        if missing:
            raise ConfigurationError(f"margin {name!r} lacks {missing}", field=name)
        values = {k: float(inputs[k]) for k in keys}
        if not all(math.isfinite(v) for v in values.values()):
            raise UndefinedMarginError(f"{name}: non-finite input")
        margins[name] = _ratio(*fn(**values), name)
        good[name] = margins[name] < threshold
    return MeasurementReport(margins, good, threshold, record, dict(conventions or {}))


__all__ = ["GOOD_THRESHOLD", "MeasurementReport", "arnold_compare", "classical_kick",
           "internal_pointer_curve", "internal_time_map", "kick_vector",
           "measurement_margins", "theta_arrival_record", "total_energy_ideal",
           "total_energy_real"]
