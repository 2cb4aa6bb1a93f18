import numpy as np
import pytest

from bethe_mps.ed import build_hamiltonian
from bethe_mps.exceptions import PreconditionError, SizeLimitError
from bethe_mps.kernel import l_operator
from bethe_mps.oracle import (
    apply_b,
    b_operator,
    bethe_state_oracle,
    hamiltonian_from_transfer,
    looped_monodromy,
    q_tilde_residual,
    reference_state,
    run_algebra_checks,
    sample_rapidities,
    spectrum_shift,
    transfer_matrix,
)

from conftest import random_rapidities


def test_single_site_at_regular_point_is_identity(k2):
    # L(eta/2) = R(0) = swap, and T = swap @ swap
    mono, _ = looped_monodromy(k2, 1, k2.eta / 2)
    assert np.allclose(mono.full(), np.eye(4), atol=1e-14)


def test_single_site_is_square_of_l(k2, rng):
    lam = random_rapidities(rng, 1)[0]
    lop = l_operator(k2, lam)
    mono, _ = looped_monodromy(k2, 1, lam)
    # full() orders (aux, site) like the L-operator
    assert np.allclose(mono.full(), lop @ lop, atol=1e-14)


def test_halves_multiply_to_monodromy(k2, kx, rng):
    for k in (k2, kx):
        for L in (2, 3, 4):
            lam = random_rapidities(rng, 1)[0]
            mono, halves = looped_monodromy(k, L, lam)
            assert np.allclose(mono.full(), halves.m_full() @ halves.n_full(), atol=1e-12)


def test_matrix_free_b_equals_dense_block(k2, rng):
    for L in (2, 3, 4):
        lam = random_rapidities(rng, 1)[0]
        v = rng.normal(size=2**L) + 1j * rng.normal(size=2**L)
        assert np.allclose(apply_b(k2, L, lam, v), b_operator(k2, L, lam) @ v, atol=1e-12)


def test_b_lowers_magnetization_by_one(k2, rng):
    L = 4
    lams = random_rapidities(rng, 2)
    v = bethe_state_oracle(k2, L, lams).amplitudes
    downs = np.array([bin(i).count("1") for i in range(2**L)])
    assert np.all(np.abs(v[downs != 2]) <= 1e-14 * np.max(np.abs(v)))
    assert np.max(np.abs(v[downs == 2])) > 0


def test_reference_state_is_transfer_eigenvector(k2, rng):
    L = 4
    w = reference_state(L)
    for lam in random_rapidities(rng, 3):
        tw = transfer_matrix(k2, L, lam) @ w
        eig = tw[0]
        assert np.allclose(tw, eig * w, atol=1e-12 * abs(eig))


@pytest.mark.parametrize("L", [2, 3])
def test_hamiltonian_from_transfer_spectrum(k2, kx, L):
    for k in (k2, kx):
        dev, shift = spectrum_shift(hamiltonian_from_transfer(k, L, 1e-5), build_hamiltonian(k, L))
        assert dev <= 1e-6
        assert abs(shift) <= 1e-6


def test_hamiltonian_from_transfer_is_the_operator(k2):
    h = hamiltonian_from_transfer(k2, 3, 1e-5)
    assert np.allclose(h, build_hamiltonian(k2, 3), atol=1e-6)


def test_fd_step_range(k2):
    with pytest.raises(PreconditionError):
        hamiltonian_from_transfer(k2, 2, 1e-2)


def test_algebra_checks_trigonometric(k2):
    rep = run_algebra_checks(k2, 3, samples=10, seed=42)
    assert set(rep.residuals) == {"yang_baxter", "reflection", "transfer_commutation", "b_commutation", "q_tilde_identity"}
    assert rep.passed(1e-10)
    assert len(rep.points) == 10


def test_algebra_checks_rational(kx):
    assert run_algebra_checks(kx, 3, samples=10, seed=42).passed(1e-10)


def test_algebra_checks_seeded(k2):
    a = run_algebra_checks(k2, 2, samples=3, seed=7)
    b = run_algebra_checks(k2, 2, samples=3, seed=7)
    assert a.points == b.points and a.residuals == b.residuals


def test_q_tilde_identity_at_regular_point(k2):
    assert q_tilde_residual(k2, 2, k2.eta / 2 + 0.1) <= 1e-12


def test_q_tilde_identity_nontrivial(k2, rng):
    # the compared operator is not trivially zero
    lam = random_rapidities(rng, 1)[0]
    _, h = looped_monodromy(k2, 2, lam)
    e, f, _, _ = h.m_blocks
    _, v, _, y = h.n_blocks
    assert np.max(np.abs(e @ v + f @ y)) > 1e-3
    assert q_tilde_residual(k2, 2, lam) <= 1e-12


def test_sample_rapidities_box(k2, rng):
    for lam in sample_rapidities(rng, k2, 50):
        assert -1 <= lam.real <= 1 and -1.5 <= lam.imag <= 1.5


def test_size_caps(k2):
    with pytest.raises(SizeLimitError):
        looped_monodromy(k2, 11, 0.1j)
    with pytest.raises(SizeLimitError):
        run_algebra_checks(k2, 7, samples=1)
