"""Scenario execution.

Every run returns a :class:`RunResult` whose scalar summary, array outputs
and provenance depend only on the scenario, so repeated runs serialize to
identical bytes.
"""
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..errors import ConfigurationError, TimelabError
from . import config as cfg

# units of exported columns (hbar = 1)
_UNITS = {
    "T": "time", "t": "time", "density": "1/time", "z": "length", "x": "length",
    "pointer_density": "1/length", "absorbed_fraction": "probability", "y": "length",
    "q": "length", "p": "momentum", "P_x": "momentum", "P_y": "momentum", "P_z": "momentum",
    "dydx": "length/length", "energy": "energy", "initial_density": "1/length",
    "final_density": "1/length",
}


@dataclass(frozen=True)
class ArrayOutput:
    """Named columns of equal length with a unit per column."""

    columns: tuple
    units: tuple
    data: np.ndarray

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if data.shape[1] != len(self.columns) or len(self.units) != len(self.columns):
            raise ValueError("array output needs one name and one unit per column")
        object.__setattr__(self, "data", data)


@dataclass(frozen=True)
class RunResult:
    scenario_id: str
    kind: str
    summary: dict
    arrays: dict = field(default_factory=dict)
    events: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)


def _table(columns, arrays):
    return ArrayOutput(tuple(columns), tuple(_UNITS.get(c, "dimensionless") for c in columns),
                       np.column_stack(arrays))


def _coupling(desc):
    from ..classical import box, bump, step, tabulated, zero
    kind = desc["kind"]
    if kind == "step":
        return step()
    if kind == "box":
        return box(desc["x0"])
    if kind == "bump":
        return bump(desc["width"], desc.get("center"))
    if kind == "tabulated":
        return tabulated(desc["nodes"], desc["values"])
    return zero()


def _observable(desc):
    from ..classical import Observable
    return Observable(desc["kind"], m=desc.get("m", 1.0), omega=desc.get("omega", 1.0),
                      q0=desc.get("q0", 0.0))


# ---------------------------------------------------------------- quantum kinds

def _packet(p):
    return p.get("m", 1.0), p["x0"], p["p0"], p["sigma"]


def _run_arrival_povm(p):
    from ..arrival import arrival_density, moments, wigner_margin
    from ..spectral import expectation, make_grid
    from ..states import gaussian_packet

    m, x0, p0, sigma = _packet(p)
    n = p.get("n_points", 4096)
    x_lo, x_hi = p.get("x_range", [-200, 200])
    grid = make_grid(n, x_lo, x_hi)
    phi = gaussian_packet(grid, x0, p0, sigma)
    dist = arrival_density(phi, m, p.get("T_range"), p.get("n_T", 2048))
    mom = moments(dist)
    summary = {
        "mean_arrival": mom["mean"], "tau": mom["tau"],
        "captured_mass": dist.captured_mass,
        "completed_mass": dist.completed_mass if dist.completed_mass is not None else math.nan,
        "mean_energy": expectation(phi, "kinetic", m),
        "wigner_margin": wigner_margin(phi, dist),
        "classical_arrival": m * abs(x0) / p0 if p0 else math.nan,
    }
    arrays = {"distribution": _table(("T", "density"), (dist.T_samples, dist.density))}
    prov = {"n_points": n, "x_range": [x_lo, x_hi], "T_range": list(dist.T_range),
            "n_T": int(dist.T_samples.size)}
    return summary, arrays, {}, prov


def _run_theta_clock_quantum(p):
    from ..measurement import sweep_grids, theta_clock_run
    from ..spectral import make_grid

    m, x0, p0, sigma = _packet(p)
    dz, t_final = p["pointer_width"], p["t_final"]
    n_x, n_z = p.get("n_x", 1024), p.get("n_z", 512)
    gx, gz = sweep_grids(m, x0, sigma, p0, dz, t_final, n_x, n_z)
    if "x_range" in p:
        gx = make_grid(n_x, *p["x_range"])
    if "z_range" in p:
        gz = make_grid(n_z, *p["z_range"])
    run = theta_clock_run(m, x0, p0, sigma, dz, gx, gz, t_final, dt=p.get("dt"))
    energy = p0 ** 2 / (2 * m)
    t_cl = m * abs(x0) / abs(p0) if p0 else math.nan
    shift = run["final"]["mean"] - run["initial"]["mean"]
    summary = {
        "record_shift": shift, "record_spread": run["final"]["spread"],
        "initial_spread": run["initial"]["spread"], "classical_arrival": t_cl,
        "relative_shift_error": abs(shift - t_cl) / t_cl,
        "energy_width_product": energy * dz, "norm": run["norm"],
    }
    arrays = {"pointer": _table(("z", "initial_density", "final_density"),
                                (run["final"]["z_samples"], run["initial"]["density"],
                                 run["final"]["density"]))}
    prov = {"n_x": n_x, "n_z": n_z, "x_range": [gx.x_min, gx.x_max],
            "z_range": [gz.x_min, gz.x_max], "dt": run["dt"], "n_steps": run["n_steps"]}
    return summary, arrays, {}, prov


def _run_allcock(p):
    from ..measurement import (AbsorbingPotential, absorb_evolve, free_flux_integral,
                               max_stable_dt)
    from ..spectral import make_grid
    from ..states import gaussian_packet

    m, x0, p0, sigma = _packet(p)
    n = p.get("n_points", 4096)
    grid = make_grid(n, *p.get("x_range", [-200, 200]))
    psi = gaussian_packet(grid, x0, p0, sigma)
    t_final = p["t_final"]
    dt = p.get("dt", 0.5 * max_stable_dt(grid, m))
    n_steps = max(1, int(math.ceil(t_final / dt)))
    dt = t_final / n_steps
    out = absorb_evolve(psi, AbsorbingPotential(p["V"]), m, dt, n_steps)
    flux = free_flux_integral(psi, m, t_final, p.get("n_flux", 2001))
    absorbed = float(out["absorbed_fraction"][-1])
    summary = {"absorbed_fraction": absorbed, "flux_oracle": flux,
               "relative_difference": abs(absorbed - flux) / flux if flux else math.nan,
               "monotone": bool(np.all(np.diff(out["norm_squared"]) <= 1e-14))}
    stride = max(1, n_steps // 2000)
    arrays = {"absorption": _table(("t", "absorbed_fraction"),
                                   (out["times"][::stride], out["absorbed_fraction"][::stride]))}
    prov = {"n_points": n, "dt": dt, "n_steps": n_steps, "n_flux": p.get("n_flux", 2001),
            "absorber": "exp(-V dt Theta(x))"}
    return summary, arrays, {}, prov


def _run_impulsive_kick(p):
    from ..measurement import KickSpec, impulsive_kick, pointer_marginal
    from ..spectral import POSITION, TwoBodyState, WaveState, make_grid
    from ..states import gaussian_packet

    gx = make_grid(p.get("n_x", 256), *p.get("x_range", [-20, 20]))
    gz = make_grid(p.get("n_z", 1024), *p.get("z_range", [-20, 20]))
    basis = p.get("basis", "position")
    amps = np.zeros(gx.n_points, dtype=complex)
    for b in p["branches"]:
        amps += math.sqrt(b.get("weight", 1.0)) * gaussian_packet(
            gx, b["center"], 0.0, p["sigma"]).amplitudes
    system = WaveState(gx, POSITION, amps).normalize()
    pointer = gaussian_packet(gz, 0.0, 0.0, p["pointer_width"])
    state = TwoBodyState.product(system, pointer)
    kicked = impulsive_kick(state, KickSpec(p["lam"], basis, lambda v: v))
    before, after = pointer_marginal(state), pointer_marginal(kicked)
    summary = {"pointer_mean": after["mean"], "pointer_spread": after["spread"],
               "initial_spread": before["spread"], "pointer_mass": after["mass"],
               "norm": kicked.norm()}
    arrays = {"pointer": _table(("z", "initial_density", "final_density"),
                                (gz.x, before["density"], after["density"]))}
    prov = {"n_x": gx.n_points, "n_z": gz.n_points, "basis": basis,
            "pointer_convention": "exp(-i lam A pi_z): pointer moves to z0 + lam a"}
    return summary, arrays, {}, prov


# ---------------------------------------------------------------- classical kinds

def _trajectory_outputs(traj):
    # the parameter column is exported as "param"; its meaning goes in the units row
    cols = ("param",) + tuple(traj.columns) + ("energy",)
    units = (_UNITS[traj.param_name],) + tuple(_UNITS.get(c, "dimensionless") for c in cols[1:])
    arr = ArrayOutput(cols, units, np.column_stack([traj.params, traj.states, traj.energy]))
    events = [(e.kind, e.param) for e in traj.events]
    return arr, events


def _run_theta_classical(p):
    from ..classical import measurement_margins, theta_arrival_record

    m, x0, P_x0 = p.get("m", 1.0), p["x0"], p["P_x0"]
    P_y0, M = p.get("P_y0", 0.0), cfg.heavy_mass(p.get("M"))
    out = theta_arrival_record(m, x0, P_x0, P_y0, M, dt=p.get("dt"))
    t0 = m * abs(x0) / P_x0
    report = measurement_margins(
        {"approximate": {"g": 1.0, "delta_P_y0": P_y0, "m": m, "C1": out["C1"]}},
        threshold=p.get("threshold", 0.1))
    summary = {"record": out["record"], "crossing_time": out["crossing_time"],
               "free_arrival_time": t0,
               "relative_error": abs(out["record"] - t0) / t0,
               "relative_error_estimate": out["relative_error_estimate"],
               "C1": out["C1"],
               "margin_approximate": report.margins["approximate"],
               "good_approximate": report.good["approximate"]}
    arr, events = _trajectory_outputs(out["trajectory"])
    prov = {"method": "event_rk4", "event_tolerance": 1e-12,
            "dt": float(np.diff(out["trajectory"].params)[0]),
            "conventions": "P_x0 is the momentum where g = 0; C1 = (P_x0/m)^2"}
    return summary, {"trajectory": arr}, {"trajectory": events}, prov


def _model(desc):
    from ..classical import (GeneralCoupling, InstantKick, InternalObservable, SystemOnly,
                             ThetaClock, TotalEnergyIdeal, TotalEnergyReal, step)
    kind = desc["kind"]
    need = {"system_only": ["H0"], "instant_kick": ["H0", "A", "t0"],
            "general_coupling": ["g"], "internal_observable": ["H0", "A", "g"],
            "total_energy_ideal": ["H_box0", "g"], "total_energy_real": ["H_box0", "g"]}
    for key in need.get(kind, []):
        if key not in desc:
            raise ConfigurationError(f"model {kind!r} needs {key!r}", field=key)
    m, M = desc.get("m", 1.0), cfg.heavy_mass(desc.get("M"))
    if kind == "system_only":
        return SystemOnly(_observable(desc["H0"]))
    if kind == "instant_kick":
        return InstantKick(_observable(desc["H0"]), _observable(desc["A"]), desc["t0"],
                           desc.get("lam", 1.0), M)
    if kind == "theta_clock":
        return ThetaClock(m=m, M=M, g=step())
    if kind == "general_coupling":
        return GeneralCoupling(m=m, M=M, g=_coupling(desc["g"]))
    if kind == "internal_observable":
        return InternalObservable(_observable(desc["H0"]), _observable(desc["A"]),
                                  _coupling(desc["g"]), m, M)
    if kind == "total_energy_ideal":
        return TotalEnergyIdeal(desc["H_box0"], _coupling(desc["g"]), desc.get("z0", 0.0))
    return TotalEnergyReal(m, desc["H_box0"], _coupling(desc["g"]), desc.get("z0", 0.0))


def _run_classical_integrate(p):
    from ..classical import PhasePoint, integrate

    model = _model(p["model"])
    start = PhasePoint({k: tuple(v) for k, v in p["start"].items()})
    method = p.get("method", "rk4")
    traj = integrate(model, start, p["span"], p["dt"], method)
    e = traj.energy
    scale = max(1.0, abs(e[0]))
    summary = {"energy_initial": float(e[0]), "energy_final": float(e[-1]),
               "relative_energy_change": abs(e[-1] - e[0]) / scale,
               "max_relative_energy_deviation": float(np.max(np.abs(e - e[0]))) / scale,
               "n_events": len(traj.events), "n_samples": int(traj.params.size)}
    for name in traj.columns:
        summary[f"final_{name}"] = float(traj.column(name)[-1])
    arr, events = _trajectory_outputs(traj)
    prov = {"method": method, "dt": p["dt"], "event_tolerance": 1e-12,
            "model": p["model"]["kind"]}
    return summary, {"trajectory": arr}, {"trajectory": events}, prov


def _run_internal_time(p):
    from ..classical import GeneralCoupling, internal_pointer_curve, internal_time_map, \
        measurement_margins

    g = _coupling(p["g"])
    m, M = p.get("m", 1.0), cfg.heavy_mass(p.get("M"))
    tmap = internal_time_map(g, m, p["P_y0"], p["C1"], p["x_range"])
    curve = internal_pointer_curve(GeneralCoupling(m=m, M=M, g=g), p["P_y0"], p["x_range"],
                                   C1=p["C1"])
    g_max = float(np.max(np.abs(g(curve["x"]))))
    report = measurement_margins(
        {"approximate": {"g": g_max, "delta_P_y0": p["P_y0"], "m": m, "C1": p["C1"]}},
        threshold=p.get("threshold", 0.1))
    summary = {"elapsed_time": float(tmap["t"][-1]), "pointer_shift": float(curve["y"][-1]),
               "g_max": g_max, "margin_approximate": report.margins["approximate"],
               "good_approximate": report.good["approximate"]}
    arrays = {"internal_time": _table(("x", "t", "y", "dydx"),
                                      (tmap["x"], tmap["t"], curve["y"], curve["dydx"]))}
    prov = {"quadrature": "composite Gauss-Legendre, 16 nodes, 32 panels per smooth piece",
            "conventions": "t(x_start) = 0, y(x_start) = 0"}
    return summary, arrays, {}, prov


def _total_energy_summary(out, p):
    from ..classical import measurement_margins
    report = measurement_margins({"ideal_clock": {"g": out["margin"], "z0": 1.0}},
                                 threshold=p.get("threshold", 0.1))
    summary = {k: v for k, v in out.items() if k not in ("good", "margin")}
    summary["margin_ideal_clock"] = report.margins["ideal_clock"]
    summary["good_ideal_clock"] = report.good["ideal_clock"]
    return summary


def _run_total_energy_ideal(p):
    from ..classical import total_energy_ideal
    out = total_energy_ideal(p["H_box0"], p["P_x"], _coupling(p["g"]), p["z0"], p["x_range"])
    prov = {"conventions": "C = H - H0 fixed from P_x at the start of x_range"}
    return _total_energy_summary(out, p), {}, {}, prov


def _run_total_energy_real(p):
    from ..classical import total_energy_real
    out = total_energy_real(p.get("m", 1.0), p["H_box0"], p["P_x"], _coupling(p["g"]),
                            p["z0"], p["x_range"])
    prov = {"conventions": "C = 2m(H - H0) fixed from P_x at the start of x_range"}
    return _total_energy_summary(out, p), {}, {}, prov


def _run_arnold_check(p):
    from ..classical import PhasePoint, arnold_compare
    dev = arnold_compare(_observable(p["H1"]), PhasePoint({"x": (p["x0"], p["P_x0"])}),
                         p["segment"], p.get("n_samples", 257))
    return {"max_deviation": dev}, {}, {}, {"integrator": "scipy DOP853, rtol 1e-13"}


def _run_margins(p):
    from ..classical import measurement_margins
    report = measurement_margins(p["conditions"], threshold=p.get("threshold", 0.1))
    summary = {}
    for name in sorted(report.margins):
        summary[f"margin_{name}"] = report.margins[name]
        summary[f"good_{name}"] = report.good[name]
    return summary, {}, {}, {"threshold": report.threshold}


_DISPATCH = {
    "arrival_povm": _run_arrival_povm,
    "theta_clock_quantum": _run_theta_clock_quantum,
    "allcock": _run_allcock,
    "impulsive_kick": _run_impulsive_kick,
    "theta_classical": _run_theta_classical,
    "classical_integrate": _run_classical_integrate,
    "internal_time": _run_internal_time,
    "total_energy_ideal": _run_total_energy_ideal,
    "total_energy_real": _run_total_energy_real,
    "arnold_check": _run_arnold_check,
    "margins": _run_margins,
}


def run_scenario(config):
    """Run one validated scenario (a path, JSON text or dict)."""
    config = cfg.load_config(config)
    if config["kind"] == "sweep":
        raise ConfigurationError("use sweep() for sweep scenarios", field="kind")
    sid = cfg.scenario_id(config)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            summary, arrays, events, prov = _DISPATCH[config["kind"]](config["params"])
        except TimelabError as exc:
            exc.args = (f"scenario {sid}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise
    provenance = {"artifact": "timelab", "version": __version__, "kind": config["kind"],
                  "config_hash": cfg.config_hash(config), "units": "hbar = 1, dimensionless",
                  "warnings": sorted({f"{w.category.__name__}: {w.message}" for w in caught}),
                  **prov}
    return RunResult(sid, config["kind"], summary, arrays, events, provenance)


def _run_member(member):
    return run_scenario(member)


@dataclass(frozen=True)
class SweepResult:
    scenario_id: str
    axes: tuple
    rows: list
    results: list
    table: ArrayOutput
    provenance: dict


def _sort_key(values):
    key = []
    for v in values:
        key.append((0, float(v), "") if isinstance(v, (int, float)) and not isinstance(v, bool)
                   else (1, 0.0, repr(v)))
    return tuple(key)


def sweep(config, workers=None):
    """Run every member of a sweep; results are sorted by axis values.

    ``workers`` (default: the scenario's ``workers`` field, else 1) sets the
    number of processes; ordering does not depend on it.
    """
    config = cfg.load_config(config)
    members = cfg.expand_sweep(config)
    names = tuple(a["name"] for a in config["axes"])
    workers = workers or config.get("workers", 1)
    ids = [f"{cfg.scenario_id(config)}-{i:03d}" for i in range(len(members))]
    configs = [dict(member, id=i) for i, (_, member) in zip(ids, members)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_member, configs))
    else:
        results = [_run_member(c) for c in configs]
    order = sorted(range(len(members)), key=lambda i: _sort_key(
        [members[i][0][n] for n in names]))
    rows = [members[i][0] for i in order]
    results = [results[i] for i in order]
    scalar_names = [k for k, v in results[0].summary.items()
                    if isinstance(v, (int, float, bool, np.floating))]
    for n in names:
        if not all(isinstance(r[n], (int, float)) and not isinstance(r[n], bool) for r in rows):
            raise ConfigurationError(f"sweep axis {n!r} must take numeric values", field=n)
    data = [[float(r[n]) for n in names] + [float(res.summary[k]) for k in scalar_names]
            for r, res in zip(rows, results)]
    columns = names + tuple(scalar_names)
    table = ArrayOutput(columns, tuple("parameter" if c in names else "summary" for c in columns),
                        np.array(data))
    prov = {"artifact": "timelab", "version": __version__, "kind": "sweep",
            "base_kind": config["base"]["kind"], "config_hash": cfg.config_hash(config),
            "n_members": len(members), "axes": list(names)}
    return SweepResult(cfg.scenario_id(config), names, rows, results, table, prov)
