"""Physical constants, experiment parameters, and SI <-> natural-unit conversion.

Natural units: hbar = m = 1 and the input-guide trap frequency omega_in = 1.
The length scale is the input-guide oscillator length a0 = sqrt(hbar/(m omega)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

# CODATA 2018, 10 significant digits
HBAR = 1.054571817e-34       # J s
K_B = 1.380649000e-23        # J / K
ATOMIC_MASS = 1.660539067e-27  # kg

# Default atom: Li-7, a standard guided-interferometry species (configurable)
LI7_MASS = 7.016003437 * ATOMIC_MASS

DIMENSIONS = ("length", "time", "energy", "momentum", "frequency")


class ParameterError(ValueError):
    """A physical parameter is missing, non-positive, or dimensionally wrong."""


@dataclass(frozen=True)
class PhysicalParams:
    """Atom and device constants, all in SI.

    omega_arm defaults to twice omega_in (the device raises the arm trap
    frequency so each arm well is twice as stiff as the input guide).
    """

    mass: float                      # kg
    omega_in: float                  # rad/s
    temperature: float               # K
    source_length: float             # m  (box width L)
    delta_l: float                   # m  (arm path-length difference)
    device_length: float             # m
    detection_time: float            # s  (time since release)
    omega_arm: float = 0.0           # rad/s; 0 means "use 2 * omega_in"

    def __post_init__(self):
        if self.omega_arm == 0.0:
            object.__setattr__(self, "omega_arm", 2.0 * self.omega_in)
        for name in ("mass", "omega_in", "omega_arm", "temperature",
                     "source_length", "delta_l", "device_length", "detection_time"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be strictly positive, got {v!r}")


@dataclass(frozen=True)
class NaturalUnits:
    """Unit scales of the internal hbar = m = omega_in = 1 system."""

    length_unit: float      # m       a0 = sqrt(hbar / (m omega))
    time_unit: float        # s       1 / omega
    energy_unit: float      # J       hbar omega
    momentum_unit: float    # 1/m     1 / a0

    def scale(self, dimension: str) -> float:
        """SI value of one natural unit of the given dimension."""
        if dimension == "length":
            return self.length_unit
        if dimension == "time":
            return self.time_unit
        if dimension == "energy":
            return self.energy_unit
        if dimension == "momentum":
            return self.momentum_unit
        if dimension == "frequency":
            return 1.0 / self.time_unit
        raise ParameterError(
            f"unknown dimension {dimension!r}; expected one of {DIMENSIONS}")


def natural_units(mass: float, omega_in: float) -> NaturalUnits:
    """Unit system for an atom of the given mass in a guide of frequency omega_in.

    Accepts either SI values or the degenerate hbar = m = omega = 1 identity
    (mass = hbar, omega_in = hbar gives a0 = 1).
    """
    if not (math.isfinite(mass) and mass > 0):
        raise ParameterError(f"mass must be strictly positive, got {mass!r}")
    if not (math.isfinite(omega_in) and omega_in > 0):
        raise ParameterError(f"omega_in must be strictly positive, got {omega_in!r}")
    a0 = math.sqrt(HBAR / (mass * omega_in))
    return NaturalUnits(
        length_unit=a0,
        time_unit=1.0 / omega_in,
        energy_unit=HBAR * omega_in,
        momentum_unit=1.0 / a0,
    )


def units_for(params: PhysicalParams) -> NaturalUnits:
    return natural_units(params.mass, params.omega_in)


def convert(value: float, dimension: str, direction: str, units: NaturalUnits) -> float:
    """Convert a scalar between SI and natural units.

    direction "to" means SI -> natural, "from" means natural -> SI.
    """
    s = units.scale(dimension)
    if direction == "to":
        return value / s
    if direction == "from":
        return value * s
    raise ParameterError(f"direction must be 'to' or 'from', got {direction!r}")


def thermal_energy_natural(temperature: float, units: NaturalUnits) -> float:
    """k_B T in units of hbar omega_in."""
    if temperature <= 0:
        raise ParameterError(f"temperature must be positive, got {temperature!r}")
    return K_B * temperature / units.energy_unit
