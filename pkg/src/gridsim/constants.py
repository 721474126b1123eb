from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    boltzmann_k: float = 1.3806503e-23  # J/K
    electron_charge_q: float = 1.60217646e-19  # C


CONSTANTS = PhysicalConstants()

FEET_PER_MILE = 5280.0
KELVIN_OFFSET = 273.15
