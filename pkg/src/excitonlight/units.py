"""Physical constants and conversions into the internal unit system.

Everything downstream computes in one unit system:

- time in picoseconds (ps),
- angular frequencies and energies in rad/ps (energies are stored divided
  by hbar, which removes hbar from all propagators),
- transition dipoles in SI coulomb-metres,
- temperatures in kelvin.

Matrix entries of typical light-harvesting models then sit within a few
orders of magnitude of unity (optical gaps ~3e3 rad/ps, phonon rates
~1e1 1/ps, radiative rates ~1e-4 1/ps), which keeps the dense linear
algebra well conditioned.

Constants are CODATA 2018 values and module-level (immutable by
convention); the 2019 SI redefinition makes several of them exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "UnitError",
    "to_internal",
    "from_internal",
    "thermal_frequency",
    "thermal_coherence_time",
]


class UnitError(ValueError):
    """Raised for unknown unit tags; configuration-level error."""


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA constants in SI, plus the conversion anchors used here.

    Attributes
    ----------
    hbar : float
        Reduced Planck constant [J s].
    k_boltzmann : float
        Boltzmann constant [J/K] (exact).
    epsilon0 : float
        Vacuum permittivity [C^2 / (J m)].
    c_light : float
        Speed of light [m/s] (exact).
    debye : float
        One debye in [C m]; 1 D = 1e-21/c C m.
    ev : float
        One electronvolt in [J] (exact).
    wavenumber : float
        Angular frequency of one spectroscopic wavenumber, [rad/s per cm^-1].
    """

    hbar: float = 1.054571817e-34
    k_boltzmann: float = 1.380649e-23
    epsilon0: float = 8.8541878128e-12
    c_light: float = 299792458.0
    ev: float = 1.602176634e-19
    debye: float = 1e-21 / 299792458.0
    wavenumber: float = 2.0 * math.pi * 299792458.0 * 100.0


CONSTANTS = PhysicalConstants()

# rad/ps per tag unit, for the frequency-like tags
_RAD_PER_PS = {
    "eV": CONSTANTS.ev / CONSTANTS.hbar * 1e-12,
    "cm^-1": CONSTANTS.wavenumber * 1e-12,
}

# straight multiplicative tags
_SCALE = {
    "K": 1.0,          # temperatures stay in kelvin
    "D": CONSTANTS.debye,   # dipoles to C m
    "ps": 1.0,
    "s": 1e12,         # times to ps
}


def to_internal(value: float, unit: str) -> float:
    """Convert ``value`` with unit tag ``unit`` into internal units.

    Energy-like tags (``eV``, ``cm^-1``) land in rad/ps, ``D`` in C m,
    ``s``/``ps`` in ps, ``K`` in K.  Conversion is linear and exact up to
    floating point, so round trips through :func:`from_internal` are
    identity to ~1e-16 relative.

    Raises
    ------
    UnitError
        If the unit tag is not one of {eV, cm^-1, K, D, ps, s}.
    """
    if unit in _RAD_PER_PS:
        return value * _RAD_PER_PS[unit]
    if unit in _SCALE:
        return value * _SCALE[unit]
    raise UnitError(f"unknown unit tag {unit!r}; expected one of "
                    f"{sorted(_RAD_PER_PS) + sorted(_SCALE)}")


def from_internal(value: float, unit: str) -> float:
    """Inverse of :func:`to_internal` for the same unit tags."""
    if unit in _RAD_PER_PS:
        return value / _RAD_PER_PS[unit]
    if unit in _SCALE:
        return value / _SCALE[unit]
    raise UnitError(f"unknown unit tag {unit!r}")


def thermal_frequency(temperature: float) -> float:
    """k_B T / hbar in rad/ps; the inverse thermal coherence time."""
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    return CONSTANTS.k_boltzmann * temperature / CONSTANTS.hbar * 1e-12


def thermal_coherence_time(temperature: float) -> float:
    """hbar / k_B T in ps."""
    return 1.0 / thermal_frequency(temperature)
