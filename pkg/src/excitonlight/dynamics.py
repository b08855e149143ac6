"""Damping-basis diagonalization, propagation, and dynamical-map tensors.

The generator is non-Hermitian, so its eigenbasis (the damping basis)
may be ill conditioned.  A computed basis is accepted only if it
reconstructs the generator to 1e-8 relative and its eigenvector matrix
has condition number below 1e12; otherwise propagation falls back to
scaling-and-squaring matrix exponentials.  Near eigenvalue coalescence
(the coherent/incoherent transition) the fallback is the reliable path.

Vectorization is row-major throughout: varrho[a * d + b] = rho[a, b].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .redfield import Liouvillian, LiouvillianTemplate

__all__ = [
    "NumericalError",
    "DampingBasis",
    "DynamicalMap",
    "Trajectory",
    "compute_damping_basis",
    "propagate",
    "map_tensor",
    "apply_map",
    "propagate_timedep",
    "trace_distance",
    "stationary_states",
]

_ACCEPT_RESIDUAL = 1e-8
_ACCEPT_CONDITION = 1e12
_MIN_STEP = 1e-12


class NumericalError(RuntimeError):
    """Eigensolver failure, step underflow, or similar numerical trouble."""


@dataclass
class DampingBasis:
    """Eigen-decomposition of a vectorized generator.

    ``eigenvectors`` holds right eigenvectors as columns (A), with
    ``inverse`` its explicit inverse, so exp(M t) = A exp(L t) A^-1.
    ``accepted`` reports whether the reconstruction residual and the
    condition estimate passed the gates; rejected bases must not be used
    for propagation.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    inverse: np.ndarray
    condition: float
    residual: float
    accepted: bool
    liouvillian: Liouvillian = field(repr=False)

    def stationary_indices(self, tol: float = 1e-10) -> np.ndarray:
        return np.flatnonzero(np.abs(self.eigenvalues) <= tol)


def compute_damping_basis(liou: Liouvillian) -> DampingBasis:
    """Diagonalize the generator; flag the basis rejected if ill conditioned."""
    mat = liou.matrix
    if not np.all(np.isfinite(mat)):
        raise NumericalError("generator contains non-finite entries")
    try:
        vals, vecs = scipy.linalg.eig(mat)
    except Exception as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"eigensolver failed on {mat.shape} generator: {exc}") from exc
    order = np.lexsort((vals.imag, -vals.real))
    vals = vals[order]
    vecs = vecs[:, order]
    try:
        inv = np.linalg.inv(vecs)
        cond = float(np.linalg.cond(vecs))
    except np.linalg.LinAlgError:
        inv = np.full_like(vecs, np.nan)
        cond = np.inf
    scale = max(1.0, float(np.abs(mat).max()))
    if np.isfinite(cond):
        recon = (vecs * vals) @ inv
        residual = float(np.abs(recon - mat).max()) / scale
    else:
        residual = np.inf
    accepted = residual < _ACCEPT_RESIDUAL and cond < _ACCEPT_CONDITION
    return DampingBasis(eigenvalues=vals, eigenvectors=vecs, inverse=inv,
                        condition=cond, residual=residual, accepted=accepted,
                        liouvillian=liou)


@dataclass
class DynamicalMap:
    """Linear map rho(0) -> rho(t) as a rank-4 tensor chi[a,b,c,d].

    chi(0) is the identity map; trace preservation reads
    sum_a chi[a,a,c,d] = delta_cd and Hermiticity covariance
    chi[a,b,c,d] = conj(chi[b,a,d,c]).
    """

    time: float
    elements: np.ndarray

    @property
    def dimension(self) -> int:
        return self.elements.shape[0]


@dataclass
class Trajectory:
    """Time grid plus density matrices in a declared basis."""

    times: np.ndarray
    states: np.ndarray  # shape (n_times, d, d)
    basis: str
    metadata: dict = field(default_factory=dict)

    def element(self, a: int, b: int) -> np.ndarray:
        return self.states[:, a, b]

    def populations(self) -> np.ndarray:
        return np.real(np.einsum("taa->ta", self.states))

    def validate(self) -> dict:
        """Worst-case Hermiticity / trace / positivity deviations over the run."""
        herm = float(np.abs(self.states - np.conj(np.swapaxes(self.states, 1, 2))).max())
        trace = float(np.abs(np.einsum("taa->t", self.states) - 1.0).max())
        min_eig = float(min(np.linalg.eigvalsh(0.5 * (s + s.conj().T))[0]
                            for s in self.states))
        return {"hermiticity": herm, "trace": trace, "min_eigenvalue": min_eig}


def _validate_density(rho: np.ndarray, dim: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValueError(f"initial state must be {dim}x{dim}, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > 1e-9:
        raise ValueError("initial state is not Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-9:
        raise ValueError("initial state must have unit trace")
    if np.linalg.eigvalsh(rho)[0] < -1e-7:
        raise ValueError("initial state is not positive semidefinite")
    return rho


def _expm_steps(mat: np.ndarray, rho_vec: np.ndarray, dts: np.ndarray) -> list[np.ndarray]:
    """Sequential exact steps with cached exponentials per unique step size."""
    cache: dict[float, np.ndarray] = {}
    out = []
    v = rho_vec
    for dt in dts:
        key = float(dt)
        if key not in cache:
            cache[key] = scipy.linalg.expm(mat * key)
        v = cache[key] @ v
        out.append(v)
    return out


def propagate(rho0: np.ndarray, liou: Liouvillian, times: Sequence[float],
              basis_tag: str = "exciton", damping: DampingBasis | None = None,
              method: str = "auto", metadata: dict | None = None) -> Trajectory:
    """Evolve a density matrix on an explicit time grid.

    ``method`` "auto" uses the damping basis when it passes the
    acceptance gates and otherwise falls back to matrix exponentials;
    "expm" forces the fallback (useful for cross-checks).
    """
    d = liou.dimension
    rho0 = _validate_density(rho0, d)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be a non-empty strictly increasing grid")
    rho_vec = rho0.reshape(d * d)
    use_basis = method != "expm"
    if use_basis:
        if damping is None:
            damping = compute_damping_basis(liou)
        use_basis = damping.accepted
    if method == "basis" and not use_basis:
        raise NumericalError("damping basis rejected "
                             f"(residual={damping.residual:.2e}, cond={damping.condition:.2e})")
    dt = times - times[0]
    if use_basis:
        coeff = damping.inverse @ rho_vec
        phases = np.exp(np.outer(dt, damping.eigenvalues))
        states_vec = (phases * coeff) @ damping.eigenvectors.T
    else:
        steps = np.diff(dt)
        vecs = [rho_vec] + _expm_steps(liou.matrix, rho_vec, steps)
        states_vec = np.asarray(vecs)
    states = states_vec.reshape(times.size, d, d)
    meta = dict(metadata or {})
    meta.setdefault("method", "damping_basis" if use_basis else "expm")
    return Trajectory(times=times, states=states, basis=basis_tag, metadata=meta)


def map_tensor(damping: DampingBasis, t: float) -> DynamicalMap:
    """Dynamical-map tensor at time ``t`` from an accepted damping basis."""
    if not damping.accepted:
        return _map_tensor_fallback(damping.liouvillian, t)
    a = damping.eigenvectors
    mat = (a * np.exp(damping.eigenvalues * t)) @ damping.inverse
    d = damping.liouvillian.dimension
    return DynamicalMap(time=t, elements=mat.reshape(d, d, d, d))


def _map_tensor_fallback(liou: Liouvillian, t: float) -> DynamicalMap:
    # column-by-column: propagate every elementary matrix exactly
    d = liou.dimension
    mat = scipy.linalg.expm(liou.matrix * t)
    return DynamicalMap(time=t, elements=mat.reshape(d, d, d, d))


def apply_map(dmap: DynamicalMap, rho0: np.ndarray) -> np.ndarray:
    """rho(t)[a,b] = sum_cd chi[a,b,c,d] rho0[c,d]."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (dmap.dimension,) * 2:
        raise ValueError("density matrix does not match map dimension")
    return np.einsum("abcd,cd->ab", dmap.elements, rho0)


def propagate_timedep(rho0: np.ndarray, template: LiouvillianTemplate, schedule,
                      times: Sequence[float], max_scale_step: float = 0.02,
                      basis_tag: str = "exciton",
                      metadata: dict | None = None) -> Trajectory:
    """Evolve under a generator whose scheduled couplings ramp in time.

    Between output times the generator is frozen at interval midpoints
    and each piece is applied exactly (matrix exponential); piece sizes
    are chosen so no scheduled coupling factor changes by more than
    ``max_scale_step`` across a piece.  Once every factor has saturated
    the remaining grid is handled by the constant generator in a single
    damping-basis evaluation.  Halving ``max_scale_step`` is the
    convergence control.
    """
    d = template.basis.dimension
    rho0 = _validate_density(rho0, d)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be a non-empty strictly increasing grid")
    t_sat = schedule.saturation_time()
    meta = dict(metadata or {})
    if t_sat <= times[0]:
        traj = propagate(rho0, template.build(), times, basis_tag=basis_tag,
                         metadata=meta)
        traj.metadata["method"] = "constant:" + traj.metadata["method"]
        return traj

    states = np.empty((times.size, d, d), dtype=complex)
    states[0] = rho0
    vec = rho0.reshape(d * d)
    t = times[0]
    out = 1
    while out < times.size and t < t_sat:
        t_stop = min(times[out], t_sat)
        while t < t_stop - 1e-15:
            h = min(schedule.step_hint(t, max_scale_step), t_stop - t)
            if h < _MIN_STEP:
                raise NumericalError(f"step size underflow at t={t:.3e} ps")
            mid = t + 0.5 * h
            liou = template.build(schedule.scales(mid))
            # action of the piece propagator on the state, not the full expm
            vec = scipy.sparse.linalg.expm_multiply(liou.matrix * h, vec,
                                                    traceA=np.trace(liou.matrix) * h)
            t += h
        if abs(t - times[out]) <= 1e-15 or times[out] <= t_sat:
            states[out] = vec.reshape(d, d)
            out += 1
    if out < times.size:
        # saturated: finish with the constant generator from (t, vec)
        rest = times[out:]
        const = template.build()
        damping = compute_damping_basis(const)
        if damping.accepted:
            coeff = damping.inverse @ vec
            phases = np.exp(np.outer(rest - t, damping.eigenvalues))
            tail = (phases * coeff) @ damping.eigenvectors.T
        else:
            tail = np.asarray(_expm_steps(const.matrix, vec,
                                          np.diff(np.concatenate(([t], rest)))))
        states[out:] = tail.reshape(rest.size, d, d)
    meta.setdefault("method", "piecewise_midpoint+damping_basis")
    meta["max_scale_step"] = max_scale_step
    return Trajectory(times=times, states=states, basis=basis_tag, metadata=meta)


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Sum of |eigenvalues| of rho1 - rho2 (no 1/2 factor).

    With this normalization orthogonal pure states are at distance 2;
    the conventional distinguishability measure is half this value.
    """
    r1 = np.asarray(rho1)
    r2 = np.asarray(rho2)
    if r1.shape != r2.shape:
        raise ValueError("states must have equal dimensions")
    diff = r1 - r2
    diff = 0.5 * (diff + diff.conj().T)
    return float(np.abs(np.linalg.eigvalsh(diff)).sum())


def stationary_states(damping: DampingBasis, tol: float = 1e-10) -> list[np.ndarray]:
    """All null-eigenvalue modes, trace-normalized where the trace is nonzero."""
    d = damping.liouvillian.dimension
    out = []
    for idx in damping.stationary_indices(tol):
        mat = damping.eigenvectors[:, idx].reshape(d, d)
        tr = np.trace(mat)
        if abs(tr) > 1e-10:
            mat = mat / tr
        else:
            mat = mat / np.linalg.norm(mat)
        out.append(mat)
    return out
