"""Bath spectral weights and the real relaxation coefficients gamma(omega).

Two environments are supported:

- a local phonon bath with an overdamped (Drude-Lorentz) spectral
  density, Ohmic at small frequency, and
- thermal radiation with a cubic (super-Ohmic) spectral density.

``gamma_real_tb`` / ``gamma_real_bb`` return the real half-Fourier
coefficients that multiply system-operator matrix elements in the
relaxation tensor.  Both carry detailed balance through the factor
coth(beta hbar omega / 2) + 1 on the odd extension of the spectral
weight: positive frequencies weight emission, negative frequencies
absorption, and the ratio gamma(-w)/gamma(w) = exp(-beta hbar w).

Normalization anchors (fixed by the two-level closed forms):

- phonon bath: gamma_tb(0) = 2 Lambda k_B T / (hbar^2 lambda), the pure
  dephasing rate of a single chromophore;
- radiation: gamma_bb(+w) + gamma_bb(-w) times mu^2 equals the two-level
  decoherence rate  mu^2 w^3 coth(hbar w / 2 k_B T) / (3 pi eps0 hbar c^3).

The radiation prefactor is evaluated once in SI and converted to 1/ps;
its raw subexpressions span ~20 orders of magnitude, so no mixed-unit
arithmetic happens at call time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .units import CONSTANTS, thermal_frequency, to_internal

__all__ = [
    "DrudeLorentzParams",
    "BlackbodyParams",
    "ThermalFactors",
    "thermal_factors",
    "spectral_weight_tb",
    "spectral_weight_bb",
    "gamma_real_tb",
    "gamma_real_bb",
    "bose_occupation",
    "BB_RATE_PREFACTOR",
]

# 1/ps per (rad/ps)^3 per (C m)^2; the 1e24 folds the rad/ps -> rad/s cubes
# and the 1/s -> 1/ps of the result into one factor.
BB_RATE_PREFACTOR = 1e24 / (
    6.0 * math.pi * CONSTANTS.epsilon0 * CONSTANTS.hbar * CONSTANTS.c_light**3
)

# below this |beta hbar omega / 2| the coth is evaluated by series
_SMALL_X = 1e-6


@dataclass(frozen=True)
class DrudeLorentzParams:
    """Overdamped phonon bath: reorganization energy, cutoff, temperature.

    ``reorganization`` is the reorganization energy over hbar (rad/ps),
    ``cutoff`` the Drude cutoff frequency (rad/ps), ``temperature`` in K.
    """

    reorganization: float
    cutoff: float
    temperature: float

    def __post_init__(self):
        if self.reorganization < 0.0:
            raise ValueError("reorganization energy must be >= 0")
        if self.cutoff <= 0.0:
            raise ValueError("cutoff frequency must be > 0")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be > 0")

    @classmethod
    def from_wavenumbers(cls, reorganization_cm1: float, cutoff_cm1: float,
                         temperature: float) -> "DrudeLorentzParams":
        return cls(
            reorganization=to_internal(reorganization_cm1, "cm^-1"),
            cutoff=to_internal(cutoff_cm1, "cm^-1"),
            temperature=temperature,
        )


@dataclass(frozen=True)
class BlackbodyParams:
    """Thermal radiation characterized by its temperature [K]."""

    temperature: float

    def __post_init__(self):
        if self.temperature <= 0.0:
            raise ValueError("temperature must be > 0")


@dataclass(frozen=True)
class ThermalFactors:
    """beta = 1/k_B T [1/J] and the thermal coherence time hbar/k_B T [ps]."""

    beta: float
    coherence_time: float


def thermal_factors(temperature: float) -> ThermalFactors:
    return ThermalFactors(
        beta=1.0 / (CONSTANTS.k_boltzmann * temperature),
        coherence_time=1.0 / thermal_frequency(temperature),
    )


def spectral_weight_tb(omega, params: DrudeLorentzParams):
    """Drude-Lorentz spectral weight 2 lambda Lam omega / (omega^2 + lambda^2).

    ``Lam`` is the reorganization energy over hbar, so the result is in
    rad/ps.  Odd in omega with its maximum at omega = lambda.
    """
    w = np.asarray(omega, dtype=float)
    out = 2.0 * params.cutoff * params.reorganization * w / (w * w + params.cutoff**2)
    return out if out.ndim else float(out)


def spectral_weight_bb(omega):
    """Cubic radiation spectral weight (2/3) hbar w^3 / (4 eps0 pi^2 c^3), SI.

    ``omega`` is in rad/ps; the value is returned for the corresponding
    SI angular frequency.  The odd extension in omega is built in
    (w^3 is odd), which is what makes a single detailed-balance formula
    cover emission and absorption.
    """
    w_si = np.asarray(omega, dtype=float) * 1e12
    out = (2.0 / 3.0) * CONSTANTS.hbar * w_si**3 / (
        4.0 * CONSTANTS.epsilon0 * math.pi**2 * CONSTANTS.c_light**3
    )
    return out if out.ndim else float(out)


def _weighted(x, small):
    """coth(x) + 1 evaluated stably as 2 / (1 - exp(-2x)).

    The direct coth form loses the exponentially small absorption
    weight to rounding once |x| > ~18; the expm1 form keeps detailed
    balance exact down to the underflow threshold.
    """
    xs = np.where(small, 1.0, x)
    with np.errstate(over="ignore"):
        return np.where(small, 0.0, 2.0 / -np.expm1(-2.0 * xs))


def gamma_real_tb(omega, params: DrudeLorentzParams):
    """Real phonon relaxation coefficient at frequency ``omega`` [1/ps].

    One half of the detailed-balance-weighted spectral weight,
    (1/2) W(omega) [coth(beta hbar omega / 2) + 1].  The omega -> 0
    limit is taken analytically, 2 Lam k_B T / (hbar lambda) with Lam
    over hbar, so the function is continuous and positive everywhere.
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    theta = thermal_frequency(params.temperature)
    x = w / (2.0 * theta)
    small = np.abs(x) < _SMALL_X
    ws = np.where(small, 1.0, w)
    lorentz = params.cutoff * params.reorganization / (w * w + params.cutoff**2)
    far = lorentz * ws * _weighted(x, small)
    # w (coth x + 1) = 2 theta + w + w x / 3 + O(x^3) near zero
    near = lorentz * (2.0 * theta + w + w * x / 3.0)
    out = np.where(small, near, far)
    return out if np.ndim(omega) else float(out[0])


def gamma_real_bb(omega, params: BlackbodyParams):
    """Real radiation relaxation coefficient per unit dipole^2 [1/ps/(C m)^2].

    Cubic in frequency times the detailed-balance factor; vanishes at
    omega = 0 (the removable w^3 coth singularity is evaluated by
    series), which is why thermal light carries no pure dephasing.
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    theta = thermal_frequency(params.temperature)
    x = w / (2.0 * theta)
    small = np.abs(x) < _SMALL_X
    far = w**3 * _weighted(x, small)
    near = 2.0 * theta * w * w + w**3 + w**3 * x / 3.0
    out = BB_RATE_PREFACTOR * np.where(small, near, far)
    return out if np.ndim(omega) else float(out[0])


def bose_occupation(omega: float, temperature: float) -> float:
    """Mean thermal occupation 1/(exp(hbar w / k_B T) - 1) for w > 0."""
    if omega <= 0.0:
        raise ValueError("bose occupation requires omega > 0")
    x = omega / thermal_frequency(temperature)
    if x > 350.0:
        return math.exp(-x)  # underflow-safe tail
    return 1.0 / math.expm1(x)
