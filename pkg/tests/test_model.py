import numpy as np
import pytest

from excitonlight import units
from excitonlight.model import (AggregateModel, Chromophore, ModelError, StateSpace,
                                build_hamiltonian, diagonalize, dipole_operator,
                                site_projector, transform)

EV = units.to_internal(1.0, "eV")
CM = units.to_internal(1.0, "cm^-1")
DEBYE = units.to_internal(1.0, "D")


def _chrom(label, ev, debye):
    return Chromophore(label, ev * EV, debye * DEBYE)


def _sym_dimer(eps_ev=2.0, d_cm=50.0, mu1=10.0, mu2=10.0):
    chroms = [_chrom("a", eps_ev, mu1), _chrom("b", eps_ev, mu2)]
    d = np.array([[0.0, d_cm * CM], [d_cm * CM, 0.0]])
    return AggregateModel(chroms, d)


class TestStateSpace:
    def test_enumeration_bijective(self):
        space = StateSpace(4)
        assert space.dimension == 16
        seen = {space.occupations(i) for i in range(16)}
        assert len(seen) == 16
        numbers = space.excitation_numbers()
        assert numbers[0] == 0 and numbers[-1] == 4
        assert sorted(numbers.tolist()).count(1) == 4


class TestModelValidation:
    def test_positive_energy_required(self):
        with pytest.raises(ModelError):
            Chromophore("x", -1.0, 0.0)

    def test_asymmetric_couplings_rejected(self):
        chroms = [_chrom("a", 2.0, 1.0), _chrom("b", 2.1, 1.0)]
        with pytest.raises(ModelError):
            AggregateModel(chroms, np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_nonzero_diagonal_rejected(self):
        chroms = [_chrom("a", 2.0, 1.0), _chrom("b", 2.1, 1.0)]
        with pytest.raises(ModelError):
            AggregateModel(chroms, np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_empty_model_rejected(self):
        with pytest.raises(ModelError):
            AggregateModel([])


class TestHamiltonian:
    def test_single_site_diagonal(self):
        # one chromophore at 2.112 eV: diag(0, eps/hbar)
        m = AggregateModel([_chrom("c", 2.112, 13.2)])
        h = build_hamiltonian(m)
        assert h.shape == (2, 2)
        np.testing.assert_allclose(h, np.diag([0.0, 2.112 * EV]), rtol=1e-14)

    def test_decoupled_sites_spectrum(self):
        e1, e2 = 2.0 * EV, 2.3 * EV
        m = AggregateModel([_chrom("a", 2.0, 1.0), _chrom("b", 2.3, 1.0)])
        h = build_hamiltonian(m)
        np.testing.assert_allclose(sorted(np.linalg.eigvalsh(h)),
                                   sorted([0.0, e1, e2, e1 + e2]), rtol=1e-13)

    def test_symmetric_dimer_single_block(self):
        # equal site energies, coupling d: single-excitation eigenvalues eps +/- d
        m = _sym_dimer(2.0, 80.0)
        h = build_hamiltonian(m)
        d = 80.0 * CM
        vals = np.sort(np.linalg.eigvalsh(h))
        np.testing.assert_allclose(vals[1:3], [2.0 * EV - d, 2.0 * EV + d], rtol=1e-13)

    def test_excitation_number_conserved(self):
        m = _sym_dimer()
        h = build_hamiltonian(m)
        n_op = sum(site_projector(m, j) for j in range(2))
        np.testing.assert_allclose(h @ n_op - n_op @ h, 0.0, atol=1e-18)


class TestDipoleOperator:
    def test_single_site_offdiagonal(self):
        m = AggregateModel([_chrom("c", 2.112, 13.2)])
        v = dipole_operator(m)
        np.testing.assert_allclose(v, 13.2 * DEBYE * np.array([[0, 1], [1, 0]]), rtol=1e-14)

    def test_mask_all_false_gives_zero(self):
        m = AggregateModel([_chrom("a", 2.0, 5.0), _chrom("b", 2.1, 7.0)],
                           light_mask=[False, False])
        assert np.all(dipole_operator(m) == 0.0)

    def test_two_site_product_basis_elements(self):
        # explicit 4x4: <f|V|single-excited> is the dipole of the other site
        mu1, mu2 = 3.0 * DEBYE, 7.0 * DEBYE
        m = AggregateModel([Chromophore("a", 2.0 * EV, mu1),
                            Chromophore("b", 2.1 * EV, mu2)])
        v = dipole_operator(m)
        expected = np.array([
            [0.0, mu1, mu2, 0.0],
            [mu1, 0.0, 0.0, mu2],
            [mu2, 0.0, 0.0, mu1],
            [0.0, mu2, mu1, 0.0],
        ])
        np.testing.assert_allclose(v, expected, rtol=1e-14)

    def test_parity_selection_rule(self):
        m = AggregateModel([_chrom("a", 2.0, 5.0), _chrom("b", 2.1, 7.0),
                            _chrom("c", 1.9, 2.0)])
        v = dipole_operator(m)
        numbers = m.space.excitation_numbers()
        for i in range(8):
            for j in range(8):
                if abs(numbers[i] - numbers[j]) != 1:
                    assert v[i, j] == 0.0


class TestSiteProjector:
    def test_single_site(self):
        m = AggregateModel([_chrom("c", 2.112, 13.2)])
        np.testing.assert_allclose(site_projector(m, 0), np.diag([0.0, 1.0]))

    def test_two_site_bit_pattern(self):
        m = _sym_dimer()
        np.testing.assert_allclose(site_projector(m, 0), np.diag([0, 1, 0, 1]))
        np.testing.assert_allclose(site_projector(m, 1), np.diag([0, 0, 1, 1]))

    def test_sum_is_excitation_number_four_sites(self):
        chroms = [_chrom(f"s{j}", 2.0 + 0.05 * j, 5.0) for j in range(4)]
        m = AggregateModel(chroms)
        total = sum(site_projector(m, j) for j in range(4))
        np.testing.assert_allclose(np.diag(total), m.space.excitation_numbers())

    def test_out_of_range(self):
        m = _sym_dimer()
        with pytest.raises(ModelError):
            site_projector(m, 2)


class TestDiagonalize:
    def test_diagonal_matrix_descending_permutation(self):
        basis = diagonalize(np.diag([1.0, 3.0, 2.0]))
        np.testing.assert_allclose(basis.energies, [3.0, 2.0, 1.0])
        # each column is a coordinate vector with positive pivot
        for k, pos in enumerate([1, 2, 0]):
            assert basis.transform[pos, k] == pytest.approx(1.0)

    def test_unitarity_and_reconstruction(self, rng):
        m = AggregateModel([_chrom(f"s{j}", 2.0 + 0.04 * j, 5.0) for j in range(3)],
                           np.array([[0, 30, 10], [30, 0, 20], [10, 20, 0]]) * CM)
        h = build_hamiltonian(m)
        basis = diagonalize(h)
        u = basis.transform
        np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
        np.testing.assert_allclose(h @ u, u @ np.diag(basis.energies),
                                   atol=1e-10 * np.abs(basis.energies).max())

    def test_symmetric_dimer_eigenvectors(self):
        m = _sym_dimer(2.0, 80.0)
        basis = diagonalize(build_hamiltonian(m))
        # single-excitation manifold: (|10> +/- |01>)/sqrt(2), indices 1 and 2
        for k in (1, 2):
            vec = basis.transform[:, k]
            np.testing.assert_allclose(np.abs(vec[[1, 2]]), [1 / np.sqrt(2)] * 2, rtol=1e-12)
            assert abs(vec[0]) < 1e-14 and abs(vec[3]) < 1e-14

    def test_descending_order_and_phase_determinism(self):
        m = _sym_dimer(2.0, 80.0, 10.0, 12.0)
        basis = diagonalize(build_hamiltonian(m))
        assert np.all(np.diff(basis.energies) <= 0)
        for k in range(4):
            col = basis.transform[:, k]
            assert col[np.argmax(np.abs(col))].real > 0

    def test_four_site_block_structure(self):
        chroms = [_chrom(f"s{j}", 2.0 + 0.03 * j, 5.0) for j in range(4)]
        d = np.zeros((4, 4))
        for j in range(4):
            for k in range(j + 1, 4):
                d[j, k] = d[k, j] = (10.0 + 5 * j + k) * CM
        m = AggregateModel(chroms, d)
        basis = diagonalize(build_hamiltonian(m))
        numbers = m.space.excitation_numbers()
        # eigenvalue multiplicity per excitation sector: 1, 4, 6, 4, 1
        sector_of = []
        for k in range(16):
            weights = np.abs(basis.transform[:, k]) ** 2
            sector = numbers[np.argmax(weights)]
            # eigenvector supported on a single sector
            assert weights[numbers != sector].sum() < 1e-20
            sector_of.append(sector)
        assert sorted(sector_of) == sorted([0] + [1] * 4 + [2] * 6 + [3] * 4 + [4])

    def test_nonhermitian_rejected(self):
        with pytest.raises(ModelError):
            diagonalize(np.array([[0.0, 1.0], [0.0, 1.0]]))


class TestTransform:
    def test_identity_fixed(self):
        m = _sym_dimer()
        basis = diagonalize(build_hamiltonian(m))
        np.testing.assert_allclose(transform(np.eye(4), basis, "site_to_exciton"),
                                   np.eye(4), atol=1e-14)

    def test_round_trip(self, rng):
        m = _sym_dimer(2.0, 70.0, 9.0, 11.0)
        basis = diagonalize(build_hamiltonian(m))
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        back = transform(transform(a, basis, "site_to_exciton"), basis, "exciton_to_site")
        np.testing.assert_allclose(back, a, atol=1e-12)

    def test_trace_preserved_random_hermitian(self, rng):
        from conftest import random_hermitian
        m = _sym_dimer()
        basis = diagonalize(build_hamiltonian(m))
        for _ in range(10):
            rho = random_hermitian(rng, 4)
            out = transform(rho, basis, "site_to_exciton")
            assert np.trace(out) == pytest.approx(np.trace(rho).real, abs=1e-13)
            np.testing.assert_allclose(out, out.conj().T, atol=1e-13)

    def test_symmetric_dimer_projector_transform(self):
        # site projector -> (|e><e| + |e'><e'| +/- |e><e'| +/- |e'><e|)/2
        m = _sym_dimer(2.0, 80.0)
        basis = diagonalize(build_hamiltonian(m))
        p0 = transform(site_projector(m, 0), basis, "site_to_exciton")
        sub = p0[1:3, 1:3]
        np.testing.assert_allclose(np.abs(sub), 0.5 * np.ones((2, 2)), atol=1e-12)
        np.testing.assert_allclose(np.diag(sub), [0.5, 0.5], atol=1e-12)

    def test_dimension_mismatch(self):
        m = _sym_dimer()
        basis = diagonalize(build_hamiltonian(m))
        with pytest.raises(ModelError):
            transform(np.eye(3), basis, "site_to_exciton")
        with pytest.raises(ModelError):
            transform(np.eye(4), basis, "sideways")
