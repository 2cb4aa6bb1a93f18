import itertools

import numpy as np
import pytest

from bethe_mps.bethe import energy, reflection_fixed_points, solve_bae
from bethe_mps.ed import build_hamiltonian
from bethe_mps.exceptions import ContractViolation, SizeLimitError
from bethe_mps.kernel import weights
from bethe_mps.mps import (
    Q_SINGLE,
    Q_TILDE,
    amplitude,
    amplitude_dense,
    amplitude_table,
    assemble_state,
    build_boundary,
    build_site_tensors,
    recursion_kernels,
)
from bethe_mps.oracle import bethe_state_oracle, single_site_tensors
from bethe_mps.states import SectorBasis, SpinConfiguration, max_relative_difference, phase_fixed

from conftest import ROOT_1, random_rapidities


def test_boundary_structure():
    assert np.array_equal(Q_SINGLE, [[0, 0], [1, 0]])
    corners = np.zeros((4, 4))
    corners[np.ix_([0, 3], [0, 3])] = 1
    assert np.array_equal(Q_TILDE, corners)
    b = build_boundary(1)
    nz = np.argwhere(b.q_script != 0)
    assert sorted(map(tuple, nz)) == [(0, 1), (3, 1)]
    assert np.all(b.q_script[b.q_script != 0] == 1)
    assert np.array_equal(b.q_script @ b.q_script, np.zeros((4, 4)))


def test_boundary_powers():
    assert np.array_equal(build_boundary(0).q_n, [[1]])
    for n in (1, 2, 3):
        b = build_boundary(n)
        expected = np.ones((1, 1))
        for _ in range(n):
            expected = np.kron(expected, b.q_script)
        assert np.array_equal(b.q_n, expected)
        assert np.array_equal(np.outer(b.ket, b.bra), b.q_n)
        assert np.linalg.matrix_rank(b.q_n) == 1


def test_boundary_cap():
    with pytest.raises(SizeLimitError):
        build_boundary(6)


def test_single_rapidity_matches_displayed_pattern(k2):
    lam = 0.3 + 0.4j
    w = weights(k2, lam)
    b, c = w.b, w.c
    t = build_site_tensors(k2, [lam])
    d1 = np.array([[1, 0, 0, 0], [0, b, 0, 0], [0, 0, b, 0], [c * c, 0, 0, b * b]])
    c1 = np.array([[0, 0, c, 0], [b * c, 0, 0, b * c], [0, 0, 0, 0], [0, 0, c, 0]])
    assert np.allclose(t.d_n, d1, atol=1e-15)
    assert np.allclose(t.c_n, c1, atol=1e-15)
    kd1, _, _, kc2 = recursion_kernels(b, c)
    assert np.allclose(kd1, d1) and np.allclose(kc2, c1)


def test_entries_at_i_pi_half(k2):
    w = weights(k2, ROOT_1)
    t = build_site_tensors(k2, [ROOT_1])
    assert t.d_n[3, 0] == pytest.approx(w.c**2)
    assert t.c_n[1, 0] == pytest.approx(w.b * w.c)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_recursion_matches_direct_single_site_product(k2, kx, rng, n):
    for k in (k2, kx):
        lams = random_rapidities(rng, n)
        t = build_site_tensors(k, lams)
        d, c = single_site_tensors(k, lams)
        assert t.bond_dim == 4**n
        assert max_relative_difference(t.d_n, d) <= 1e-13
        assert max_relative_difference(t.c_n, c) <= 1e-13


def test_rebuild_is_deterministic(k2):
    a = build_site_tensors(k2, [0.2 + 0.3j, -0.5j])
    b = build_site_tensors(k2, [0.2 + 0.3j, -0.5j])
    assert np.array_equal(a.d_n, b.d_n) and np.array_equal(a.c_n, b.c_n)


def displayed_triple(k, lam):
    w = weights(k, lam)
    b, c = w.b, w.c
    # amplitudes for x = 1, 2, 3
    return np.array([1 + c * c + b * b * c * c + b**4, b * (1 + b * b + c * c), 2 * b * b])


def test_amplitudes_proportional_to_displayed_triple(k2):
    for guess in (ROOT_1 + 0.01j, 0.4j, -0.8 + 1.5j):
        lam = solve_bae(k2, 3, [guess]).lambdas[0]
        st = assemble_state(build_site_tensors(k2, [lam]), build_boundary(1), 3)
        assert max_relative_difference(phase_fixed(st.amplitudes), phase_fixed(displayed_triple(k2, lam))) <= 1e-9


def test_null_without_boundary(k2):
    for guess in (ROOT_1, 0.4j, -0.8 + 1.5j):
        t = build_site_tensors(k2, [guess])
        st = assemble_state(t, np.eye(4), 3)
        assert np.max(np.abs(st.amplitudes)) <= 1e-12


def test_null_without_boundary_random(k2, kx, rng):
    for k in (k2, kx):
        for L, n in [(3, 2), (4, 2), (5, 3)]:
            t = build_site_tensors(k, random_rapidities(rng, n))
            st = assemble_state(t, np.eye(4**n), L)
            scale = np.max(np.abs(assemble_state(t, build_boundary(n), L).amplitudes))
            assert np.max(np.abs(st.amplitudes)) <= 1e-12 * max(1, scale)


def test_rank_one_and_dense_paths_agree(k2, rng):
    lams = random_rapidities(rng, 2)
    t = build_site_tensors(k2, lams)
    b = build_boundary(2)
    for pos in itertools.combinations(range(1, 6), 2):
        cfg = SpinConfiguration(pos, 5)
        a1, a2 = amplitude(t, b, cfg), amplitude_dense(t, b, cfg)
        assert abs(a1 - a2) <= 1e-12 * max(1, abs(a2))


def test_two_sites_matches_oracle(k2, rng):
    lam = random_rapidities(rng, 1)
    st = assemble_state(build_site_tensors(k2, lam), build_boundary(1), 2)
    ref = bethe_state_oracle(k2, 2, lam).to_sector(1)
    assert max_relative_difference(st.amplitudes, ref.amplitudes) <= 1e-12


def test_empty_rapidities_give_reference_state(k2):
    st = assemble_state(build_site_tensors(k2, []), build_boundary(0), 4)
    assert st.amplitudes.tolist() == [1.0]


def test_random_non_bethe_state_matches_oracle_but_is_not_eigen(k2, rng):
    lams = random_rapidities(rng, 2)
    st = assemble_state(build_site_tensors(k2, lams), build_boundary(2), 4)
    ref = bethe_state_oracle(k2, 4, lams).to_sector(2)
    assert max_relative_difference(st.amplitudes, ref.amplitudes) <= 1e-10
    h = build_hamiltonian(k2, 4, 2)
    v = st.amplitudes
    e = np.vdot(v, h @ v) / np.vdot(v, v)
    assert np.linalg.norm(h @ v - e * v) > 1e-3 * np.linalg.norm(v)


def test_oracle_identity_sweep(k2, kx, rng):
    for k in (k2, kx):
        for L in range(2, 7):
            for n in range(0, min(L, 3) + 1):
                lams = random_rapidities(rng, n)
                st = assemble_state(build_site_tensors(k, lams), build_boundary(n), L)
                ref = bethe_state_oracle(k, L, lams).to_sector(n)
                assert max_relative_difference(st.amplitudes, ref.amplitudes) <= 1e-10


def test_permutation_invariance(k2, rng):
    lams = random_rapidities(rng, 3)
    base = assemble_state(build_site_tensors(k2, lams), build_boundary(3), 5).amplitudes
    for perm in itertools.permutations(lams):
        other = assemble_state(build_site_tensors(k2, perm), build_boundary(3), 5).amplitudes
        assert max_relative_difference(base, other) <= 1e-10


@pytest.mark.parametrize(
    "kname, L, guesses",
    [("k2", 5, [0.2j, 0.5 + 1.5j]), ("kx", 4, [0.3, 0.9]), ("kx", 5, [0.2, 0.7]), ("k2", 3, [ROOT_1 + 0.01j])],
)
def test_converged_roots_give_eigenvectors(request, kname, L, guesses):
    k = request.getfixturevalue(kname)
    r = solve_bae(k, L, guesses)
    assert r.converged
    st = assemble_state(build_site_tensors(k, r.lambdas), build_boundary(r.n), L)
    h = build_hamiltonian(k, L, r.n)
    v = st.amplitudes
    e = energy(k, r.lambdas)
    assert np.linalg.norm(h @ v - e * v) <= 1e-8 * np.linalg.norm(h, 2) * np.linalg.norm(v)


def test_fixed_point_root_set_is_not_an_eigenvector(k2):
    # converges, but contains i*pi/2 at L=6: flagged, not an eigenstate
    r = solve_bae(k2, 6, [0.3 + 0.2j, -0.4 + 0.9j])
    assert r.converged
    assert reflection_fixed_points(k2, r.lambdas)
    st = assemble_state(build_site_tensors(k2, r.lambdas), build_boundary(2), 6)
    h = build_hamiltonian(k2, 6, 2)
    v = st.amplitudes
    e = energy(k2, r.lambdas)
    assert np.linalg.norm(h @ v - e * v) > 1e-2 * np.linalg.norm(h, 2) * np.linalg.norm(v)


def test_amplitude_contract(k2):
    t = build_site_tensors(k2, [0.3j])
    with pytest.raises(ContractViolation):
        amplitude(t, build_boundary(1), SpinConfiguration((1, 2), 3))
    with pytest.raises(ContractViolation):
        amplitude(t, build_boundary(2), SpinConfiguration((1,), 3))


def test_state_size_caps(k2):
    t = build_site_tensors(k2, [0.1j] * 0 + [0.1j, 0.2j, 0.3j, 0.4j, 0.5j])
    with pytest.raises(SizeLimitError):
        assemble_state(t, build_boundary(5), 8)
    with pytest.raises(SizeLimitError):
        build_site_tensors(k2, [0.1j * i for i in range(1, 7)])


def test_amplitude_table_keys(k2):
    st = assemble_state(build_site_tensors(k2, [0.3j, 0.7j]), build_boundary(2), 3)
    assert list(amplitude_table(st)) == ["x=1,2", "x=1,3", "x=2,3"]


def test_single_amplitude_long_chain(k2, rng):
    lams = random_rapidities(rng, 3)
    t = build_site_tensors(k2, lams)
    a = amplitude(t, build_boundary(3), SpinConfiguration((5, 20, 40), 64))
    assert np.isfinite(a)


def test_sector_basis_order():
    b = SectorBasis(4, 2)
    assert [s.positions for s in b] == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    assert len(b) == SectorBasis.size(4, 2) == 6
