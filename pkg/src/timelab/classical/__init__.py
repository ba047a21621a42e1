"""Classical clock-pointer models, integrators and measurement records."""
from .integrate import Event, Trajectory, integrate
from .models import (CouplingFunction, GeneralCoupling, InstantKick, InternalObservable,
                     Observable, PhasePoint, SystemOnly, ThetaClock, TotalEnergyIdeal,
                     TotalEnergyReal, arrival_time, box, bump, harmonic, kinetic, momentum,
                     position, step, tabulated, zero)
from .records import (GOOD_THRESHOLD, MeasurementReport, arnold_compare, classical_kick,
                      internal_pointer_curve, internal_time_map, measurement_margins,
                      theta_arrival_record, total_energy_ideal, total_energy_real)

__all__ = [
    "CouplingFunction", "Event", "GOOD_THRESHOLD", "GeneralCoupling", "InstantKick",
    "InternalObservable", "MeasurementReport", "Observable", "PhasePoint", "SystemOnly",
    "ThetaClock", "TotalEnergyIdeal", "TotalEnergyReal", "Trajectory", "arnold_compare",
    "arrival_time", "box", "bump", "classical_kick", "harmonic", "integrate",
    "internal_pointer_curve", "internal_time_map", "kinetic", "measurement_margins",
    "momentum", "position", "step", "tabulated", "theta_arrival_record",
    "total_energy_ideal", "total_energy_real", "zero",
]
