import numpy as np
import pytest

from bethe_mps.bethe import energy, solve_bae
from bethe_mps.ed import (
    EigenPair,
    build_hamiltonian,
    diagonal_part,
    diagonalize_sector,
    eigen_residual,
    match_state,
    spin_flip_spectrum_gap,
)
from bethe_mps.exceptions import ContractViolation, NullStateError, PreconditionError, SizeLimitError
from bethe_mps.kernel import xxz
from bethe_mps.mps import assemble_state, build_boundary, build_site_tensors
from bethe_mps.states import SectorBasis, StateVector

from conftest import ROOT_1, SQRT12


def test_two_site_sector_block(k2, kx):
    assert np.allclose(build_hamiltonian(kx, 2, 1), [[-3, 2], [2, -3]])
    assert np.allclose(build_hamiltonian(k2, 2, 0), [[-2]])
    assert np.allclose(build_hamiltonian(k2, 2, 1), [[-6, 2], [2, -6]])


def test_three_site_single_flip_block(k2):
    h = build_hamiltonian(k2, 3, 1)
    assert np.allclose(h, [[-6, 2, 0], [2, -10, 2], [0, 2, -6]])


def test_sector_spectrum_xxz_three_sites(k2):
    e = [p.energy for p in diagonalize_sector(k2, 3, 1)]
    assert np.allclose(e, [-8 - SQRT12, -6, -8 + SQRT12], atol=1e-10)


def test_reference_energy(k2):
    assert diagonalize_sector(k2, 5, 0)[0].energy == pytest.approx(-2)


def test_full_hamiltonian_hermitian_and_diagonal(k2):
    h = build_hamiltonian(k2, 5)
    assert np.allclose(h, h.conj().T)
    assert np.allclose(np.diag(h).real, diagonal_part(k2, 5))


def test_trace_identity(k2):
    # Tr H = 2^L * (-Delta) + Delta * sum over bonds of (Tr sz sz - 1) = -Delta 2^L (L)
    L, d = 4, 2.0
    assert np.trace(build_hamiltonian(k2, L)).real == pytest.approx(-d * 2**L * L)


def test_sector_block_is_restriction_of_full(k2, kx):
    for k in (k2, kx):
        L = 5
        full = build_hamiltonian(k, L)
        for n in range(L + 1):
            basis = SectorBasis(L, n)
            idx = [c.full_index() for c in basis]
            assert np.allclose(full[np.ix_(idx, idx)], build_hamiltonian(k, L, n))


def test_full_conserves_magnetization(k2):
    L = 4
    h = build_hamiltonian(k2, L)
    downs = np.array([bin(i).count("1") for i in range(2**L)])
    assert np.all(h[downs[:, None] != downs[None, :]] == 0)


def test_spin_flip_symmetry(k2, kx):
    for k in (k2, kx, xxz(1.3)):
        for L, n in [(4, 1), (5, 2), (6, 2)]:
            assert spin_flip_spectrum_gap(k, L, n) <= 1e-10


def test_union_of_sectors_is_full_spectrum(k2):
    L = 5
    full = np.sort(np.linalg.eigvalsh(build_hamiltonian(k2, L)))
    parts = np.sort([p.energy for n in range(L + 1) for p in diagonalize_sector(k2, L, n)])
    assert np.allclose(full, parts, atol=1e-10)


def test_eigenvectors_orthonormal(k2):
    pairs = diagonalize_sector(k2, 6, 3)
    v = np.column_stack([p.vector.amplitudes for p in pairs])
    assert np.allclose(v.conj().T @ v, np.eye(len(pairs)), atol=1e-12)
    energies = [p.energy for p in pairs]
    assert energies == sorted(energies)


def test_match_state_examples(k2):
    pairs = diagonalize_sector(k2, 3, 1)
    h = build_hamiltonian(k2, 3, 1)
    for guess, e in [(ROOT_1 + 0.01j, -6), (0.4j, -8 - SQRT12), (-0.8 + 1.5j, -8 + SQRT12)]:
        r = solve_bae(k2, 3, [guess])
        st = assemble_state(build_site_tensors(k2, r.lambdas), build_boundary(1), 3)
        rep = match_state(st, pairs, h)
        assert rep.matched and not rep.degenerate
        assert rep.energy == pytest.approx(e, abs=1e-10)
        assert rep.residual <= 1e-9


def test_match_state_explicit_vectors(k2):
    # eigenvectors of [[-6,2,0],[2,-10,2],[0,2,-6]]: (1,0,-1) at -6 and (1,-1-sqrt3,1) at -8-sqrt12
    pairs = diagonalize_sector(k2, 3, 1)
    rep = match_state(StateVector(np.array([1, 0, -1], dtype=complex), 3, 1), pairs)
    assert rep.matched and rep.energy == pytest.approx(-6)
    rep = match_state(StateVector(np.array([1, -1 - np.sqrt(3), 1], dtype=complex), 3, 1), pairs)
    assert rep.matched and rep.energy == pytest.approx(-8 - SQRT12)


def test_match_state_partial_overlap(k2):
    pairs = diagonalize_sector(k2, 3, 1)
    rep = match_state(StateVector(np.array([1, 0, 0], dtype=complex), 3, 1), pairs)
    assert not rep.matched
    assert rep.residual > 0.1


def test_match_state_accepts_full_space_vector(k2):
    pairs = diagonalize_sector(k2, 3, 1)
    v = np.zeros(8, dtype=complex)
    v[[4, 1]] = [1, -1]  # x=1 and x=3
    assert match_state(StateVector(v, 3), pairs).matched


def test_match_state_null_and_sector_errors(k2):
    pairs = diagonalize_sector(k2, 3, 1)
    with pytest.raises(NullStateError):
        match_state(StateVector(np.zeros(3, dtype=complex), 3, 1), pairs)
    with pytest.raises(ContractViolation):
        match_state(StateVector(np.ones(3, dtype=complex), 3, 2), pairs)
    with pytest.raises(PreconditionError):
        match_state(StateVector(np.ones(3, dtype=complex), 3, 1), [])


def test_degenerate_projector():
    # two-fold degenerate level: a mixture is matched through the projector
    q, _ = np.linalg.qr(np.random.default_rng(42).normal(size=(3, 3)))
    pairs = [EigenPair(e, StateVector(q[:, j].astype(complex), 3, 1), (3, 1)) for j, e in enumerate([1.0, 1.0, 2.0])]
    mix = 0.6 * q[:, 0] + 0.8j * q[:, 1]
    rep = match_state(StateVector(mix, 3, 1), pairs)
    assert rep.degenerate and rep.matched
    assert rep.residual <= 1e-12
    assert not match_state(StateVector(q[:, 0] + q[:, 2], 3, 1), pairs).matched


def test_eigen_residual(k2):
    h = build_hamiltonian(k2, 3, 1)
    pairs = diagonalize_sector(k2, 3, 1)
    assert eigen_residual(h, pairs[0].vector, pairs[0].energy) <= 1e-14
    with pytest.raises(NullStateError):
        eigen_residual(h, StateVector(np.zeros(3, dtype=complex), 3, 1), 0)


def test_bethe_energy_matches_ed_for_larger_chain(k2):
    r = solve_bae(k2, 5, [0.2j, 0.5 + 1.5j])
    e = energy(k2, r.lambdas).real
    assert min(abs(p.energy - e) for p in diagonalize_sector(k2, 5, 2)) <= 1e-9


def test_size_caps(k2):
    with pytest.raises(SizeLimitError):
        build_hamiltonian(k2, 13)
    with pytest.raises(PreconditionError):
        build_hamiltonian(k2, 1)
