import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

import oracles
from iqcoherence import channels as ch
from iqcoherence import sdp
from iqcoherence import states as st
from iqcoherence.errors import DimensionMismatch

PLUS = np.full((2, 2), 0.5, dtype=complex)
seeds = hst.integers(0, 2**40)


def test_cover_in_subspace_is_trivial():
    rho = st.random_iq(2, 2, st.make_rng(1))
    sol = sdp.solve_cover(rho, sdp.Subspace(2, 2))
    assert sol.value == pytest.approx(1, abs=1e-12)
    assert np.allclose(sol.primal_matrix, rho)
    prob = sdp.SdpProblem(rho, sdp.Subspace(2, 2))
    assert sdp.dual_certificate(prob, sol) == pytest.approx(1, abs=1e-12)


def test_cover_plus_state():
    sol = sdp.solve_cover(PLUS, sdp.Subspace.diagonal(2))
    assert sol.value == pytest.approx(2, abs=1e-7)
    assert np.allclose(sol.primal_matrix, np.eye(2), atol=1e-6)


def test_cover_bell():
    sol = sdp.solve_cover(st.bell_phi_plus().rho, sdp.Subspace(2, 2))
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(2, abs=1e-7)
    assert sol.dual_value == pytest.approx(2, abs=1e-7)
    prob = sdp.SdpProblem(st.bell_phi_plus().rho, sdp.Subspace(2, 2))
    assert sdp.dual_certificate(prob, sol) == pytest.approx(2, abs=1e-7)


@pytest.mark.parametrize("seed", range(6))
def test_cover_matches_interior_point(seed):
    rng = st.make_rng(seed)
    dA, dB = [(2, 2), (3, 2), (2, 3)][seed % 3]
    rho = st.ginibre(dA * dB, 1 + seed % (dA * dB), rng)
    sol = sdp.solve_cover(rho, sdp.Subspace(dA, dB))
    assert sol.value == pytest.approx(oracles.block_cover(rho, dA, dB), abs=1e-6)
    assert 0 <= sol.dual_gap < 1e-7
    assert sol.dual_value <= sol.value + 1e-12


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_cover_qubit_closed_form(seed):
    rho = st.ginibre(2, 2, st.make_rng(seed))
    assert sdp.solve_cover(rho, sdp.Subspace.diagonal(2)).value == pytest.approx(oracles.qubit_cover(rho), abs=1e-7)


def test_cover_frozen_instance():
    # frozen interior-point values (cvxpy, CLARABEL) of seeded Ginibre instances
    rho = st.ginibre(4, 4, st.make_rng(2024))
    assert sdp.solve_cover(rho, sdp.Subspace(2, 2)).value == pytest.approx(1.774902621953921, abs=1e-6)
    rho = st.ginibre(3, 3, st.make_rng(2024))
    assert sdp.solve_cover(rho, sdp.Subspace.diagonal(3)).value - 1 == pytest.approx(0.961497100493459, abs=1e-6)
    assert sdp.solve_weight(rho).value == pytest.approx(0.023055886401825654, abs=1e-6)


def test_cover_is_feasible():
    rho = st.ginibre(6, 3, st.make_rng(11))
    sub = sdp.Subspace(3, 2)
    sol = sdp.solve_cover(rho, sub)
    x = sol.primal_matrix
    assert sub.contains(x, 1e-14)
    assert np.linalg.eigvalsh(x - rho)[0] >= -1e-12
    assert np.trace(x).real == pytest.approx(sol.value, abs=1e-12)


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_cover_invariant_under_diagonal_unitary(seed):
    rng = st.make_rng(seed)
    rho = st.ginibre(4, 4, rng)
    u = np.diag(np.exp(2j * np.pi * rng.uniform(size=4)))
    a = sdp.solve_cover(rho, sdp.Subspace(2, 2)).value
    b = sdp.solve_cover(u @ rho @ u.conj().T, sdp.Subspace(2, 2)).value
    assert a == pytest.approx(b, abs=1e-8)


@given(seeds)
@settings(max_examples=8, deadline=None)
def test_cover_multiplicative(seed):
    rng = st.make_rng(seed)
    r1, r2 = st.ginibre(2, 2, rng), st.ginibre(2, 2, rng)
    joint = sdp.solve_cover(np.kron(r1, r2), sdp.Subspace.diagonal(4)).value
    prod = sdp.solve_cover(r1, sdp.Subspace.diagonal(2)).value * sdp.solve_cover(r2, sdp.Subspace.diagonal(2)).value
    assert joint == pytest.approx(prod, abs=1e-6)


def test_weight_trivial_cases():
    assert sdp.solve_weight(np.diag([0.3, 0.7])).value == pytest.approx(1, abs=1e-9)
    assert sdp.solve_weight(PLUS).value == pytest.approx(0, abs=1e-7)


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_weight_qubit_closed_form(seed):
    rho = st.ginibre(2, 2, st.make_rng(seed))
    assert sdp.solve_weight(rho).value == pytest.approx(oracles.qubit_weight(rho), abs=1e-7)


@pytest.mark.parametrize("seed", range(5))
def test_weight_matches_interior_point(seed):
    d = 3 + seed % 2
    rho = st.ginibre(d, 1 + seed % d, st.make_rng(100 + seed))
    sol = sdp.solve_weight(rho)
    assert sol.value == pytest.approx(oracles.max_diagonal_subtraction(rho), abs=1e-6)
    assert sol.value <= sol.dual_value + 1e-12
    assert sol.dual_gap < 1e-7
    dvec = np.diag(sol.primal_matrix).real if sol.primal_matrix.ndim == 2 else sol.primal_matrix
    assert np.all(dvec >= -1e-12)
    assert np.linalg.eigvalsh(rho - np.diag(dvec))[0] >= -1e-10


def test_weight_dual_certificate():
    rho = st.ginibre(3, 3, st.make_rng(9))
    sol = sdp.solve_weight(rho)
    prob = sdp.SdpProblem(rho, sdp.Subspace.diagonal(3), "max-subtract")
    assert sdp.dual_certificate(prob, sol) >= sol.value - 1e-12


def test_weight_invariant_under_diagonal_unitary():
    rng = st.make_rng(10)
    rho = st.ginibre(3, 3, rng)
    u = np.diag(np.exp(1j * rng.uniform(size=3)))
    assert sdp.solve_weight(u @ rho @ u.conj().T).value == pytest.approx(sdp.solve_weight(rho).value, abs=1e-8)


def test_problem_shape_check():
    with pytest.raises(DimensionMismatch):
        sdp.SdpProblem(np.eye(3) / 3, sdp.Subspace(2, 2))


def test_subspace_projection():
    sub = sdp.Subspace(2, 2)
    m = ch.haar_unitary(4, st.make_rng(12))
    p = sub.project(m)
    assert sub.contains(p)
    assert np.allclose(sub.from_blocks(sub.blocks(m)), p)
