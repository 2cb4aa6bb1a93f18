import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bethe_mps.bethe import (
    SolverConfig,
    bae_residual,
    canonical_rapidity,
    check_distinct,
    energy,
    polish_roots,
    reflection_fixed_points,
    same_solution,
    solve_bae,
)
from bethe_mps.exceptions import DegenerateRapidityError, PreconditionError
from bethe_mps.ed import diagonalize_sector

from conftest import ROOT_1, ROOT_2, ROOT_3, SQRT12


def test_residual_zero_at_i_pi_half(k2):
    assert np.max(np.abs(bae_residual(k2, 3, [ROOT_1]))) <= 1e-14


def test_residual_at_four_digit_root_then_polished(k2):
    assert np.max(np.abs(bae_residual(k2, 3, [ROOT_2]))) <= 1e-3
    r = solve_bae(k2, 3, [ROOT_2])
    assert r.converged and r.residual_norm <= 1e-12


def test_residual_nonzero_off_root(k2):
    assert np.max(np.abs(bae_residual(k2, 3, [1.0]))) > 0.1


def test_residual_imag_part_reduced(k2, rng):
    for _ in range(20):
        lam = complex(rng.uniform(-1, 1), rng.uniform(-1.5, 1.5))
        r = bae_residual(k2, 4, [lam])[0]
        assert -np.pi < r.imag <= np.pi


@pytest.mark.parametrize(
    "guess, target",
    [(ROOT_1 + 0.01j, ROOT_1), (0.4j, ROOT_2), (-0.8 + 1.5j, ROOT_3)],
)
def test_solve_documented_guesses(k2, guess, target):
    r = solve_bae(k2, 3, [guess])
    assert r.converged and r.residual_norm <= 1e-12
    lam = r.lambdas[0]
    # reference values carry 3-4 digits
    assert abs(lam - target) < 5e-4


def test_solve_i_pi_half_to_1e10(k2):
    lam = solve_bae(k2, 3, [ROOT_1 + 0.01j]).lambdas[0]
    assert abs(lam.imag - np.pi / 2) <= 1e-10
    assert abs(lam.real) <= 1e-10


def test_triple_root_stalls_without_polish(k2):
    # documents why the extended-precision refinement exists
    r = solve_bae(k2, 3, [ROOT_1 + 0.01j], SolverConfig(polish_digits=0))
    assert r.converged
    assert abs(r.lambdas[0] - ROOT_1) > 1e-6
    assert abs(energy(k2, r.lambdas) + 6) > 1e-9


def test_polish_keeps_simple_roots(k2):
    r = solve_bae(k2, 3, [0.4j], SolverConfig(polish_digits=0))
    refined, _ = polish_roots(k2, 3, r.lambdas)
    assert abs(refined[0] - r.lambdas[0]) < 1e-12


def test_energy_examples(k2):
    assert energy(k2, [ROOT_1]) == pytest.approx(-6, abs=1e-12)
    assert energy(k2, []) == pytest.approx(-2)
    # verified pairing: 0.3747i belongs to -8-sqrt(12); the -0.831+i pi/2 root to -8+sqrt(12)
    r2 = solve_bae(k2, 3, [0.4j])
    r3 = solve_bae(k2, 3, [-0.8 + 1.5j])
    assert energy(k2, r2.lambdas) == pytest.approx(-8 - SQRT12, abs=1e-9)
    assert energy(k2, r3.lambdas) == pytest.approx(-8 + SQRT12, abs=1e-9)


def test_energies_match_ed_spectrum(k2):
    ed = sorted(p.energy for p in diagonalize_sector(k2, 3, 1))
    ba = sorted(energy(k2, solve_bae(k2, 3, [g]).lambdas).real for g in (ROOT_1 + 0.01j, 0.4j, -0.8 + 1.5j))
    assert np.allclose(ed, ba, atol=1e-9)


def test_xxx_two_sites(kx):
    # H(L=2, n=1) = [[-3, 2], [2, -3]] has eigenvalues -5, -1
    r = solve_bae(kx, 2, [0.6])
    assert r.lambdas[0] == pytest.approx(0.5, abs=1e-10)
    assert energy(kx, r.lambdas) == pytest.approx(-5, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1.4, allow_nan=False, allow_infinity=False), min_size=2, max_size=4))
def test_permutation_invariance(lams):
    from bethe_mps.kernel import xxz

    k = xxz(2.0)
    try:
        base = bae_residual(k, 5, lams)
    except DegenerateRapidityError:
        return
    for perm in itertools.permutations(range(len(lams))):
        r = bae_residual(k, 5, [lams[i] for i in perm])
        assert np.allclose(r, base[list(perm)], atol=1e-13)


def test_negation_symmetry(k2):
    for g in (0.4j, -0.8 + 1.5j):
        lam = solve_bae(k2, 3, [g]).lambdas[0]
        assert np.max(np.abs(bae_residual(k2, 3, [-lam]))) <= 1e-10


def test_converged_flag_matches_tolerance(k2):
    r = solve_bae(k2, 4, [0.3 + 0.2j], SolverConfig(max_iterations=1))
    assert r.converged == (r.residual_norm <= 1e-12)
    r = solve_bae(k2, 3, [0.4j])
    assert r.converged == (r.residual_norm <= 1e-12)


def test_unreachable_tolerance_not_converged(k2):
    r = solve_bae(k2, 3, [0.4j], SolverConfig(tolerance=1e-30, max_iterations=5))
    assert not r.converged


def test_coincident_rapidities_rejected(k2):
    with pytest.raises(DegenerateRapidityError):
        bae_residual(k2, 4, [0.3j, 0.3j])
    with pytest.raises(DegenerateRapidityError):
        check_distinct([0.1, 0.1 + 1e-12])


def test_pole_guard_on_residual(k2):
    with pytest.raises(DegenerateRapidityError):
        bae_residual(k2, 3, [k2.eta / 2])


def test_solver_config_validation():
    with pytest.raises(PreconditionError):
        SolverConfig(tolerance=0)
    with pytest.raises(PreconditionError):
        SolverConfig(damping=1.5)
    with pytest.raises(PreconditionError):
        SolverConfig(polish_digits=5)


def test_same_solution_modulo_i_pi(k2):
    assert same_solution([0.2j, -0.8 + 1.5j], [-0.8 + 1.5j - 1j * np.pi, 0.2j], k2)
    assert not same_solution([0.2j], [0.3j], k2)
    assert not same_solution([0.2j], [0.2j, 0.4j], k2)


def test_canonical_rapidity(k2, kx):
    z = canonical_rapidity(k2, 0.3 + 1j * (np.pi / 2 + np.pi))
    assert z == pytest.approx(0.3 + 1j * np.pi / 2)
    assert canonical_rapidity(kx, 0.3 + 5j) == 0.3 + 5j


def test_reflection_fixed_points(k2, kx):
    assert reflection_fixed_points(k2, [ROOT_1, 0.0, ROOT_2, -ROOT_1 + 1j * np.pi]) == [0, 1, 3]
    assert reflection_fixed_points(kx, [0.0, 0.5j]) == [0]


def test_empty_guess(k2):
    r = solve_bae(k2, 3, [])
    assert r.converged and r.n == 0
