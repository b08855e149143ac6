"""Non-secular relaxation tensor and its superoperator (Liouvillian) form.

Every environment enters through a coupling channel: a Hermitian system
operator K in the exciton basis paired with a real rate function
gamma(omega).  The channel's second-order coefficients factorize as

    Gamma[a,b,c,d] = gamma(omega_dc) K[a,b] K[c,d],

and the relaxation tensor sums four such terms per channel:

    R[a,b,c,d] = delta_ac sum_e Gamma[b,e,e,d] + delta_bd sum_e Gamma[a,e,e,c]
                 - Gamma[c,a,b,d] - Gamma[d,b,a,c].

No secular (rotating-wave) truncation is applied anywhere: population
and coherence blocks stay coupled exactly as assembled.

Channels are additive and mutually uncorrelated; phonon baths are
site-local (one channel per site projector) while the radiation couples
once through the total dipole operator, so cross-chromophore radiative
terms appear automatically.

Only the real parts of the coefficients are implemented.  The
``include_imaginary`` switch reserves the interface for a
principal-value (Lamb-shift-like) extension; switching it off is
bit-identical to the default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import bath
from .model import AggregateModel, ExcitonBasis, dipole_operator, site_projector, transform

__all__ = [
    "CouplingChannel",
    "RedfieldTensor",
    "Liouvillian",
    "LiouvillianTemplate",
    "phonon_channels",
    "radiation_channel",
    "gamma_element",
    "assemble_tensor",
    "liouvillian",
    "rebuild_scaled",
]

_HERM_TOL = 1e-12


@dataclass
class CouplingChannel:
    """System operator + rate function pair for one environment.

    ``coupling`` must be Hermitian in the exciton basis.  ``gamma`` maps
    frequencies (rad/ps, any sign) to real rates; it must accept numpy
    arrays.  ``scheduled`` marks the channel whose coupling elements are
    ramped by a turn-on schedule.
    """

    label: str
    coupling: np.ndarray
    gamma: Callable[[np.ndarray], np.ndarray]
    scheduled: bool = False

    def __post_init__(self):
        k = np.asarray(self.coupling)
        scale = max(1.0, float(np.abs(k).max()))
        if np.abs(k - k.conj().T).max() > _HERM_TOL * scale:
            raise ValueError(f"channel {self.label!r}: coupling operator not Hermitian")

    def scaled(self, factors) -> "CouplingChannel":
        """Channel with coupling elements multiplied by ``factors`` in [0, 1]."""
        f = np.asarray(factors, dtype=float)
        if np.any(f < 0.0) or np.any(f > 1.0):
            raise ValueError("scale factors must lie in [0, 1]")
        return CouplingChannel(self.label, self.coupling * f, self.gamma,
                               scheduled=self.scheduled)


def phonon_channels(model: AggregateModel, basis: ExcitonBasis,
                    params: bath.DrudeLorentzParams) -> list[CouplingChannel]:
    """One site-local phonon channel per chromophore, identical spectra."""
    gamma = lambda w, p=params: bath.gamma_real_tb(w, p)  # noqa: E731
    channels = []
    for j, chrom in enumerate(model.chromophores):
        k_site = site_projector(model, j)
        k_exc = transform(k_site, basis, "site_to_exciton")
        channels.append(CouplingChannel(f"phonon:{chrom.label}", k_exc, gamma))
    return channels


def radiation_channel(model: AggregateModel, basis: ExcitonBasis,
                      params: bath.BlackbodyParams) -> CouplingChannel:
    """Single global channel through the (mask-restricted) total dipole.

    The dipole operator changes excitation number by one, so its
    exciton-basis diagonal vanishes; this is checked because it is what
    removes pure dephasing from the radiative dynamics.
    """
    v_exc = transform(dipole_operator(model, masked=True), basis, "site_to_exciton")
    diag_scale = max(np.abs(v_exc).max(), 1e-300)
    if np.abs(np.diag(v_exc)).max() > 1e-10 * diag_scale:
        raise ValueError("dipole operator acquired diagonal exciton elements")
    gamma = lambda w, p=params: bath.gamma_real_bb(w, p)  # noqa: E731
    return CouplingChannel("radiation", v_exc, gamma, scheduled=True)


@dataclass
class RedfieldTensor:
    """Rank-4 relaxation tensor in the exciton basis.

    ``elements[a, b, c, d]`` couples d rho[a,b] / dt to rho[c,d] with an
    overall minus sign in the master equation.  Satisfies the
    Hermiticity-preservation symmetry R[a,b,c,d] = conj(R[b,a,d,c]) and
    the trace condition sum_a R[a,a,c,d] = 0.
    """

    elements: np.ndarray
    basis: ExcitonBasis
    channel_labels: tuple[str, ...]

    @property
    def dimension(self) -> int:
        return self.elements.shape[0]


def gamma_element(channel: CouplingChannel, basis: ExcitonBasis,
                  a: int, b: int, c: int, d: int) -> complex:
    """Single coefficient gamma(omega_dc) K[a,b] K[c,d] of one channel."""
    w_dc = basis.energies[d] - basis.energies[c]
    return complex(channel.gamma(w_dc) * channel.coupling[a, b] * channel.coupling[c, d])


def _channel_tensor(channel: CouplingChannel, basis: ExcitonBasis) -> np.ndarray:
    k = np.asarray(channel.coupling, dtype=complex)
    # weighted operator W[c,d] = gamma(omega_dc) K[c,d]
    gmat = channel.gamma(basis.omega_matrix.T)
    w = k * gmat
    kw = k @ w
    d = k.shape[0]
    eye = np.eye(d)
    r = np.einsum("ac,bd->abcd", eye, kw)
    r += np.einsum("bd,ac->abcd", eye, kw)
    r -= np.einsum("ca,bd->abcd", k, w)
    r -= np.einsum("db,ac->abcd", k, w)
    return r


def assemble_tensor(channels: Sequence[CouplingChannel],
                    basis: ExcitonBasis,
                    include_imaginary: bool = False) -> RedfieldTensor:
    """Sum the relaxation tensors of all channels in one exciton basis."""
    if include_imaginary:
        raise NotImplementedError(
            "principal-value (Lamb-shift) coefficients are reserved but not built")
    d = basis.dimension
    total = np.zeros((d, d, d, d), dtype=complex)
    for ch in channels:
        if ch.coupling.shape != (d, d):
            raise ValueError(f"channel {ch.label!r} does not match basis dimension {d}")
        total += _channel_tensor(ch, basis)
    return RedfieldTensor(elements=total, basis=basis,
                          channel_labels=tuple(ch.label for ch in channels))


@dataclass
class Liouvillian:
    """Vectorized generator: d varrho / dt = matrix @ varrho.

    Index convention: varrho[a * d + b] = rho[a, b] (row-major), and
    matrix[(a,b), (c,d)] = -i omega_ab delta_ac delta_bd - R[a,b,c,d].
    The vectorized identity is a left null vector (trace preservation).
    """

    matrix: np.ndarray
    basis: ExcitonBasis
    tensor: RedfieldTensor | None = None

    @property
    def dimension(self) -> int:
        return self.basis.dimension


def liouvillian(basis: ExcitonBasis, tensor: RedfieldTensor) -> Liouvillian:
    """Combine the coherent part -i omega_ab with the relaxation tensor."""
    if tensor.basis is not basis and tensor.dimension != basis.dimension:
        raise ValueError("tensor and basis dimensions differ")
    d = basis.dimension
    coherent = np.diag((-1j * basis.omega_matrix).reshape(d * d))
    mat = coherent - tensor.elements.reshape(d * d, d * d)
    return Liouvillian(matrix=mat, basis=basis, tensor=tensor)


@dataclass
class LiouvillianTemplate:
    """Factory for Liouvillians with optionally rescaled channel couplings.

    Keeps the exciton basis and channel set; ``build`` assembles the
    generator with the scheduled channels' coupling elements multiplied
    by element-wise factors (rates then scale bilinearly, as products of
    two factors).  ``build()`` with no factors reproduces the static
    generator bit-exactly.
    """

    basis: ExcitonBasis
    channels: list[CouplingChannel]
    _static: Liouvillian | None = field(default=None, repr=False)

    def build(self, scale_factors=None) -> Liouvillian:
        if scale_factors is None:
            if self._static is None:
                self._static = liouvillian(self.basis,
                                           assemble_tensor(self.channels, self.basis))
            return self._static
        chans = [ch.scaled(scale_factors) if ch.scheduled else ch
                 for ch in self.channels]
        return liouvillian(self.basis, assemble_tensor(chans, self.basis))


def rebuild_scaled(template: LiouvillianTemplate, scale_factors) -> Liouvillian:
    """Generator with the scheduled channel couplings scaled by [0, 1] factors."""
    return template.build(scale_factors)
