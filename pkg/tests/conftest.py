import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_density(rng, dim):
    """Random full-rank density matrix."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (a + a.conj().T)


def assert_spectra_match(computed, expected, rtol, atol_floor=1.0):
    """Pair two eigenvalue sets by nearest distance and compare.

    Ordering of near-degenerate eigenvalues is float-fragile, so a
    greedy minimal-distance assignment is the robust comparison.
    """
    computed = list(np.asarray(computed, dtype=complex))
    for ev in np.asarray(expected, dtype=complex):
        dists = [abs(c - ev) for c in computed]
        k = int(np.argmin(dists))
        tol = rtol * max(abs(ev), atol_floor)
        assert dists[k] <= tol, f"eigenvalue {ev} unmatched; best {computed[k]} (|diff|={dists[k]:.3e} > {tol:.3e})"
        computed.pop(k)
