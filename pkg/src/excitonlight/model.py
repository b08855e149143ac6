"""Electronic-system model: Hamiltonian, dipole operator, site projectors.

Each of the N chromophores is a two-level site; the full state space is
the 2^N product basis enumerated by occupation bitmask (bit j set means
site j is excited).  The excitation-exchange coupling conserves total
excitation number, so the Hamiltonian is block diagonal over excitation
sectors; the full space is kept anyway because the doubly excited states
participate in the dynamics.

Exciton (energy eigenstate) labels follow descending energy: index 0 is
the highest-lying state and index 2^N - 1 the global ground state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelError",
    "Chromophore",
    "AggregateModel",
    "StateSpace",
    "ExcitonBasis",
    "build_hamiltonian",
    "dipole_operator",
    "site_projector",
    "diagonalize",
    "transform",
]


class ModelError(ValueError):
    """Invalid aggregate definition (asymmetric couplings, bad indices...)."""


@dataclass(frozen=True)
class Chromophore:
    """One two-level site.

    Parameters
    ----------
    label : str
        Site name, also used to address couplings and masks in configs.
    energy : float
        Excited-state energy over hbar, rad/ps.  Must be positive.
    dipole : float
        Signed transition dipole in C m (all dipoles are taken parallel,
        so a scalar with sign is sufficient).
    ground_energy : float
        Ground-level offset over hbar, rad/ps.  Defaults to zero.
    """

    label: str
    energy: float
    dipole: float
    ground_energy: float = 0.0

    def __post_init__(self):
        if self.energy <= 0.0:
            raise ModelError(f"site {self.label!r}: excited-state energy must be > 0")


@dataclass(frozen=True)
class StateSpace:
    """Bitmask enumeration of the 2^N product basis."""

    n_sites: int

    @property
    def dimension(self) -> int:
        return 1 << self.n_sites

    def occupations(self, index: int) -> tuple[int, ...]:
        """Occupation (0/1) of each site in basis state ``index``."""
        return tuple((index >> j) & 1 for j in range(self.n_sites))

    def excitation_numbers(self) -> np.ndarray:
        """Total excitation number of every basis state, in index order."""
        return np.array([bin(n).count("1") for n in range(self.dimension)])


class AggregateModel:
    """Chromophore aggregate with excitation-exchange couplings.

    Parameters
    ----------
    chromophores : list[Chromophore]
        Ordered sites; order fixes the product-basis bit layout.
    couplings : array_like, shape (N, N)
        Symmetric coupling matrix in rad/ps with zero diagonal.  Entry
        (j, k) is the single-excitation hopping element between sites j
        and k.
    light_mask : sequence of bool, optional
        Per-site switch for the coupling to the radiation field.
        Defaults to all sites coupled.
    """

    def __init__(self, chromophores, couplings=None, light_mask=None):
        if not chromophores:
            raise ModelError("need at least one chromophore")
        self.chromophores = list(chromophores)
        n = len(self.chromophores)
        if couplings is None:
            couplings = np.zeros((n, n))
        couplings = np.asarray(couplings, dtype=float)
        if couplings.shape != (n, n):
            raise ModelError(f"couplings must be {n}x{n}, got {couplings.shape}")
        if not np.array_equal(couplings, couplings.T):
            raise ModelError("coupling matrix must be symmetric")
        if np.any(np.diag(couplings) != 0.0):
            raise ModelError("coupling matrix must have zero diagonal")
        self.couplings = couplings
        if light_mask is None:
            light_mask = [True] * n
        if len(light_mask) != n:
            raise ModelError("light mask length must match number of sites")
        self.light_mask = [bool(m) for m in light_mask]
        self.space = StateSpace(n)

    @property
    def n_sites(self) -> int:
        return len(self.chromophores)

    @property
    def dimension(self) -> int:
        return self.space.dimension

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.chromophores]

    def site_index(self, label: str) -> int:
        for j, c in enumerate(self.chromophores):
            if c.label == label:
                return j
        raise ModelError(f"no chromophore labelled {label!r}")


def build_hamiltonian(model: AggregateModel) -> np.ndarray:
    """System Hamiltonian over hbar in the product basis, rad/ps.

    Diagonal entries are sums of the occupied sites' energies (plus the
    constant ground offsets); each coupling D_jk contributes the
    off-diagonal element between the two states that differ by moving
    one excitation between sites j and k, so the single-excitation
    block reads diag(eps_j) with off-diagonal D_jk.
    """
    n = model.n_sites
    dim = model.dimension
    h = np.zeros((dim, dim))
    ground_offset = sum(c.ground_energy for c in model.chromophores)
    for state in range(dim):
        diag = ground_offset
        for j, c in enumerate(model.chromophores):
            if (state >> j) & 1:
                diag += c.energy
        h[state, state] = diag
    for j in range(n):
        for k in range(j + 1, n):
            if model.couplings[j, k] == 0.0:
                continue
            for state in range(dim):
                # hop: site j excited, site k not
                if (state >> j) & 1 and not (state >> k) & 1:
                    other = state ^ (1 << j) ^ (1 << k)
                    h[other, state] = model.couplings[j, k]
                    h[state, other] = model.couplings[j, k]
    return h


def dipole_operator(model: AggregateModel, masked: bool = True) -> np.ndarray:
    """Total transition-dipole operator in the product basis, C m.

    Sum over sites of mu_j (raise + lower), restricted to sites whose
    light mask is on when ``masked``.  Connects only basis states whose
    excitation numbers differ by exactly one.
    """
    dim = model.dimension
    v = np.zeros((dim, dim))
    for j, c in enumerate(model.chromophores):
        if masked and not model.light_mask[j]:
            continue
        bit = 1 << j
        for state in range(dim):
            v[state ^ bit, state] += c.dipole
    return v


def site_projector(model: AggregateModel, j: int) -> np.ndarray:
    """Occupation-number operator of site ``j`` (0-based) in the product basis.

    Diagonal with eigenvalue 1 on every basis state in which site j is
    excited.  These are the system-side operators of the local phonon
    couplings.
    """
    if not 0 <= j < model.n_sites:
        raise ModelError(f"site index {j} out of range for {model.n_sites} sites")
    dim = model.dimension
    diag = np.array([(state >> j) & 1 for state in range(dim)], dtype=float)
    return np.diag(diag)


@dataclass(frozen=True)
class ExcitonBasis:
    """Energy eigenbasis with eigenvalues sorted in descending order.

    ``transform`` holds the eigenvectors as columns, expressed in the
    product (site) basis, so column k is the k-th exciton state and the
    ground state sits in the last column.
    """

    energies: np.ndarray
    transform: np.ndarray
    omega_matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        omega = self.energies[:, None] - self.energies[None, :]
        object.__setattr__(self, "omega_matrix", omega)

    @property
    def dimension(self) -> int:
        return self.energies.size


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Deterministic eigenvector phase: largest-|component| real positive."""
    k = int(np.argmax(np.abs(vec)))
    pivot = vec[k]
    if pivot == 0:
        return vec
    if np.iscomplexobj(vec):
        return vec * (np.conj(pivot) / abs(pivot))
    return vec if pivot > 0 else -vec


def diagonalize(hamiltonian: np.ndarray, degeneracy_tol: float = 1e-9) -> ExcitonBasis:
    """Diagonalize a Hermitian Hamiltonian into an ExcitonBasis.

    Eigenvalues are sorted descending.  Within degenerate groups
    (relative gap below ``degeneracy_tol``) eigenvectors are ordered by
    the lexicographic key of their components rounded to 8 decimals,
    which makes the basis reproducible across LAPACK builds.
    """
    h = np.asarray(hamiltonian)
    if not np.allclose(h, h.conj().T, atol=1e-12 * max(1.0, float(np.abs(h).max()))):
        raise ModelError("hamiltonian must be Hermitian")
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ArithmeticError(f"eigensolver failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    vecs = np.column_stack([_fix_phase(vecs[:, k]) for k in range(vecs.shape[1])])

    scale = max(1.0, float(np.abs(vals).max()))
    start = 0
    while start < vals.size:
        stop = start + 1
        while stop < vals.size and abs(vals[start] - vals[stop]) <= degeneracy_tol * scale:
            stop += 1
        if stop - start > 1:
            keys = [tuple(np.round(vecs[:, k].real, 8)) for k in range(start, stop)]
            perm = sorted(range(stop - start), key=lambda i: keys[i])
            vecs[:, start:stop] = vecs[:, [start + i for i in perm]]
        start = stop
    return ExcitonBasis(energies=vals, transform=vecs)


def transform(matrix: np.ndarray, basis: ExcitonBasis, direction: str) -> np.ndarray:
    """Similarity-transform an operator or density matrix between bases.

    ``direction`` is ``"site_to_exciton"`` (U^dag A U) or
    ``"exciton_to_site"`` (U A U^dag).  Trace and Hermiticity are
    preserved because U is unitary.
    """
    a = np.asarray(matrix)
    u = basis.transform
    if a.shape != u.shape:
        raise ModelError(f"dimension mismatch: operator {a.shape} vs basis {u.shape}")
    if direction == "site_to_exciton":
        return u.conj().T @ a @ u
    if direction == "exciton_to_site":
        return u @ a @ u.conj().T
    raise ModelError(f"unknown direction {direction!r}")
