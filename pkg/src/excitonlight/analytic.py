"""Closed-form two-level solutions and dimer rate estimates.

These are the independent oracles for the numerical engine: eigenvalues
and dynamical-map tensors of a single chromophore coupled to either
bath, the coherent/incoherent regime classification, and the dimer
decay-rate estimate R[e,e',e,e'] that tracks the exact eigenvalue.

The two-level map elements are the exact solution of the assembled
generator.  With w the transition frequency and g the coherence decay
rate, the coherence pair evolves under

    [[-i w - g, g], [g, i w - g]],

whose exponential has eigencomponents exp((-g -/+ i W) t) with
W = sqrt(w^2 - g^2) and weights (1 +/- w/W)/2; at the critical point
g = w these merge into the t exp(-g t) secular term, and in the
incoherent regime W is imaginary, turning the oscillations into
hyperbolic relaxation.  The population pair relaxes at 2g toward a
stationary excited fraction p = (coth(x) - 1)/(2 coth(x)) fixed by
detailed balance (-> 1/2 in the high-temperature limit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bath
from .units import thermal_frequency

__all__ = [
    "TwoLevelParams",
    "RegimeReport",
    "gamma_bb_closed_form",
    "gamma_bb_high_temperature",
    "gamma_tb_closed_form",
    "stationary_excited_fraction",
    "two_level_eigenvalues",
    "chi_closed_form",
    "classify_regime",
    "coherence_mode",
    "dimer_rate_estimates",
]


@dataclass(frozen=True)
class TwoLevelParams:
    """Single chromophore viewed as a two-level system.

    ``omega``: transition frequency, rad/ps (> 0); ``dipole``: C m;
    at most one of the two bath parameter sets is consulted per call.
    """

    omega: float
    dipole: float = 0.0
    drude: bath.DrudeLorentzParams | None = None
    blackbody: bath.BlackbodyParams | None = None

    def __post_init__(self):
        if self.omega <= 0.0:
            raise ValueError("transition frequency must be positive")


@dataclass(frozen=True)
class RegimeReport:
    """Coherent / Incoherent / Critical classification of (omega, gamma)."""

    regime: str
    gamma: float
    omega: float
    varpi: complex
    zeta: complex


def gamma_bb_closed_form(params: TwoLevelParams) -> float:
    """Radiative decoherence rate mu^2 w^3 coth(hbar w / 2 k T) / (3 pi eps0 hbar c^3).

    Equals the assembled tensor element R[e,g,e,g]: the sum of the
    emission and absorption coefficients, since (coth+1) + (coth-1)
    collapses to 2 coth.  Units 1/ps.
    """
    if params.blackbody is None:
        raise ValueError("blackbody parameters required")
    x = params.omega / (2.0 * thermal_frequency(params.blackbody.temperature))
    return 2.0 * bath.BB_RATE_PREFACTOR * params.dipole**2 * params.omega**3 / math.tanh(x)


def gamma_bb_high_temperature(params: TwoLevelParams) -> float:
    """High-temperature form, linear in T and quadratic in the frequency.

    Never substituted silently for the full expression; exposed for the
    regime discussion (coth(x) ~ 1/x for k T >> hbar w).
    """
    if params.blackbody is None:
        raise ValueError("blackbody parameters required")
    theta = thermal_frequency(params.blackbody.temperature)
    return 4.0 * bath.BB_RATE_PREFACTOR * params.dipole**2 * params.omega**2 * theta


def gamma_tb_closed_form(drude: bath.DrudeLorentzParams) -> float:
    """Phonon pure-dephasing rate 2 Lam k_B T / (hbar lambda), Lam over hbar.

    Frequency independent (the zero-frequency limit of the Ohmic
    coefficient); linear in both the temperature and the reorganization
    energy.
    """
    return 2.0 * drude.reorganization * thermal_frequency(drude.temperature) / drude.cutoff


def stationary_excited_fraction(params: TwoLevelParams) -> float:
    """Excited-state population of the radiative stationary state.

    Detailed balance gives nbar / (2 nbar + 1) = (coth x - 1)/(2 coth x);
    approaches 1/2 from below as the temperature grows.
    """
    if params.blackbody is None:
        raise ValueError("blackbody parameters required")
    x = params.omega / (2.0 * thermal_frequency(params.blackbody.temperature))
    c = 1.0 / math.tanh(x)
    return (c - 1.0) / (2.0 * c)


def _sort_canonical(vals: np.ndarray) -> np.ndarray:
    order = np.lexsort((vals.imag, -vals.real))
    return vals[order]


def two_level_eigenvalues(params: TwoLevelParams, bath_tag: str) -> np.ndarray:
    """The four generator eigenvalues for one active bath.

    Phonon bath: {0, 0, -g -/+ i w} with the frequency-independent g.
    Radiation:   {0, -2g, -g -/+ i sqrt(w^2 - g^2)}; the square root is
    continued to imaginary values in the incoherent regime.  Returned in
    the same canonical order as the numerical damping basis
    (descending real part, then ascending imaginary part).
    """
    w = params.omega
    if bath_tag == "tb":
        if params.drude is None:
            raise ValueError("drude parameters required")
        g = gamma_tb_closed_form(params.drude)
        vals = np.array([0.0, 0.0, -g - 1j * w, -g + 1j * w])
    elif bath_tag == "bb":
        g = gamma_bb_closed_form(params)
        varpi = np.sqrt(complex(w * w - g * g))
        vals = np.array([0.0, -2.0 * g, -g - 1j * varpi, -g + 1j * varpi])
    else:
        raise ValueError(f"unknown bath tag {bath_tag!r}")
    return _sort_canonical(vals)


def _sinz_over_z(z: complex, t: float) -> complex:
    """t * sin(z t)/(z t) with the removable z -> 0 limit."""
    zt = z * t
    if abs(zt) < 1e-8:
        return t * (1.0 - zt * zt / 6.0)
    return np.sin(zt) / z


def chi_closed_form(params: TwoLevelParams, bath_tag: str, t: float) -> np.ndarray:
    """Exact dynamical-map tensor of the two-level system at time ``t``.

    Exciton index order (0, 1) = (excited, ground).  Only the listed
    entries are nonzero:

    phonon bath -- chi[0,0,0,0] = chi[1,1,1,1] = 1 and the two decaying
    phases chi[0,1,0,1] = exp((-i w - g) t), chi[1,0,1,0] its conjugate.
    No entry maps populations into coherences, so no coherence is ever
    generated from a diagonal initial state.

    radiation -- the population block relaxes at 2g toward the
    stationary excited fraction p, and the coherence block carries the
    oscillation-with-decay structure described in the module docstring;
    chi[0,1,1,0] = chi[1,0,0,1] = g sin(W t)/W exp(-g t) is the
    coherence-conjugation mixing, and again no population-to-coherence
    entries exist.
    """
    chi = np.zeros((2, 2, 2, 2), dtype=complex)
    w = params.omega
    if bath_tag == "tb":
        if params.drude is None:
            raise ValueError("drude parameters required")
        g = gamma_tb_closed_form(params.drude)
        chi[0, 0, 0, 0] = 1.0
        chi[1, 1, 1, 1] = 1.0
        chi[0, 1, 0, 1] = np.exp((-1j * w - g) * t)
        chi[1, 0, 1, 0] = np.exp((1j * w - g) * t)
        return chi
    if bath_tag != "bb":
        raise ValueError(f"unknown bath tag {bath_tag!r}")
    g = gamma_bb_closed_form(params)
    p = stationary_excited_fraction(params)
    e2 = math.exp(-2.0 * g * t)
    chi[0, 0, 0, 0] = p + (1.0 - p) * e2
    chi[0, 0, 1, 1] = p * (1.0 - e2)
    chi[1, 1, 0, 0] = (1.0 - p) * (1.0 - e2)
    chi[1, 1, 1, 1] = (1.0 - p) + p * e2
    varpi = np.sqrt(complex(w * w - g * g))
    damp = math.exp(-g * t)
    cosx = np.cos(varpi * t)
    sfac = _sinz_over_z(varpi, t)
    chi[0, 1, 0, 1] = damp * (cosx - 1j * w * sfac)
    chi[1, 0, 1, 0] = damp * (cosx + 1j * w * sfac)
    chi[0, 1, 1, 0] = damp * g * sfac
    chi[1, 0, 0, 1] = damp * g * sfac
    return chi


def classify_regime(omega: float, gamma: float) -> RegimeReport:
    """Coherent if w^2 > g^2, incoherent if below, critical at |w - g| < 1e-9 w."""
    if omega < 0.0 or gamma < 0.0:
        raise ValueError("omega and gamma must be nonnegative")
    varpi = np.sqrt(complex(omega * omega - gamma * gamma))
    zeta = varpi / omega if omega > 0 else complex(0.0)
    if abs(omega - gamma) < 1e-9 * max(omega, 1e-300):
        tag = "Critical"
    elif omega * omega > gamma * gamma:
        tag = "Coherent"
    else:
        tag = "Incoherent"
    return RegimeReport(regime=tag, gamma=gamma, omega=omega,
                        varpi=complex(varpi), zeta=complex(zeta))


def coherence_mode(matrix: np.ndarray, a: int, b: int,
                   previous: np.ndarray | None = None) -> tuple[complex, np.ndarray]:
    """Generator eigenvalue tracked to the (a, b) coherence component.

    Picks the eigenvector with the largest |component| on index a*d + b,
    or, when ``previous`` is given, the largest overlap with it, which
    is the robust continuation along parameter scans.
    """
    d2 = matrix.shape[0]
    d = int(round(math.sqrt(d2)))
    vals, vecs = np.linalg.eig(matrix)
    norms = np.linalg.norm(vecs, axis=0)
    if previous is not None:
        score = np.abs(previous.conj() @ vecs) / norms
    else:
        score = np.abs(vecs[a * d + b, :]) / norms
    k = int(np.argmax(score))
    return complex(vals[k]), vecs[:, k] / norms[k]


@dataclass(frozen=True)
class DimerRates:
    """Radiative estimates for the single-exciton coherence of a dimer."""

    gamma_estimate: float      # R[e,e',e,e']
    transfer_estimate: float   # 2 R[e,e',e,e']
    eigenvalue: complex        # tracked L_{ee'} of the full generator
    omega: float               # single-exciton splitting


def dimer_rate_estimates(tensor_elements: np.ndarray, liou_matrix: np.ndarray,
                         e_idx: int, ep_idx: int, omega: float) -> DimerRates:
    """Compare R[e,e',e,e'] with the tracked coherence eigenvalue.

    The estimate accounts for the decay rate |Re L_{ee'}| in the
    coherent regime and twice it approximates the incoherent transfer
    rate.
    """
    r = float(np.real(tensor_elements[e_idx, ep_idx, e_idx, ep_idx]))
    val, _ = coherence_mode(liou_matrix, e_idx, ep_idx)
    return DimerRates(gamma_estimate=r, transfer_estimate=2.0 * r,
                      eigenvalue=val, omega=omega)
