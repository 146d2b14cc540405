import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

import oracles
from iqcoherence import channels as ch
from iqcoherence import coherence as co
from iqcoherence import linalg as la
from iqcoherence import states as st
from iqcoherence.convexroof import RoofConfig
from iqcoherence.errors import DimensionMismatch, UnknownMeasure

BELL = st.bell_phi_plus()
FAST = RoofConfig(restarts=8, max_steps=1500)
seeds = hst.integers(0, 2**40)


def a_marginal_probs(psi, dims):
    return np.real(np.diag(la.partial_trace(la.ket_to_dm(psi), dims, 0)))


def test_bell_golden_values():
    assert co.cr_iq(BELL).value == pytest.approx(1, abs=1e-9)
    assert co.cmax_iq(BELL).value == pytest.approx(1, abs=1e-6)
    assert co.cl1_iq(BELL).value == pytest.approx(1, abs=1e-9)
    assert co.cf_iq(BELL).value == pytest.approx(1, abs=1e-9)
    assert co.ca_iq(BELL).value == pytest.approx(1, abs=1e-9)
    assert co.cmin_iq(BELL).value == pytest.approx(1, abs=1e-9)


def test_single_system_golden_values():
    plus = np.full((2, 2), 0.5)
    assert co.c_l1(plus).value == pytest.approx(1)
    assert co.c_r(plus).value == pytest.approx(1)
    assert co.c_max(plus).value == pytest.approx(1, abs=1e-7)
    assert co.roc(plus).value == pytest.approx(1, abs=1e-7)
    assert co.c_w(plus).value == pytest.approx(1, abs=1e-7)
    assert co.c_f(plus).value == pytest.approx(1, abs=1e-12)
    assert co.c_a_reg(np.eye(2) / 2).value == pytest.approx(1)
    mc = st.maximally_coherent(3).rho
    assert co.c_l1(mc).value == pytest.approx(2)
    assert co.c_r(mc).value == pytest.approx(np.log2(3))
    assert co.c_max(mc).value == pytest.approx(np.log2(3), abs=1e-6)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_pure_state_formulas(seed):
    rng = st.make_rng(seed)
    dims = (3, 2) if seed % 2 else (2, 2)
    psi = st.haar_pure_vector(6 if seed % 2 else 4, rng)
    s = st.pure(psi, dims)
    p = a_marginal_probs(psi, dims)
    rho_a = la.partial_trace(s.rho, dims, 0)
    rho_b = la.partial_trace(s.rho, dims, 1)
    assert co.cr_iq(s).value == pytest.approx(co.c_r(rho_a).value + oracles.entropy_bits(rho_b), abs=1e-9)
    assert co.cmax_iq(s).value == pytest.approx(2 * np.log2(np.sqrt(p).sum()), abs=1e-6)
    assert co.cl1_iq(s).value == pytest.approx(np.sqrt(p).sum() ** 2 - 1, abs=1e-9)
    entropy = -np.sum(p * np.log2(p))
    report = co.cf_iq(s)
    assert report.value == pytest.approx(entropy, abs=1e-9)
    assert report.method == "formula-pure"


def test_rho_lambda_equality_family():
    for lam in np.linspace(0, 1, 5):
        rho = st.rho_lambda(lam)
        cl1 = co.cl1_iq(rho).value
        assert cl1 == pytest.approx(1, abs=1e-9)
        assert co.cmax_iq(rho).value == pytest.approx(np.log2(1 + cl1), abs=1e-6)


@pytest.mark.parametrize("measure", ["cr_iq", "cmax_iq", "cmin_iq", "cl1_iq"])
def test_zero_on_iq_states(measure):
    rho = st.random_iq(3, 2, st.make_rng(1))
    assert co.compute(measure, rho, (3, 2)).value == pytest.approx(0, abs=1e-7)


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_invariant_under_local_unitary_on_b(seed):
    rng = st.make_rng(seed)
    rho = st.ginibre(4, 4, rng)
    u = np.kron(np.eye(2), ch.haar_unitary(2, rng))
    rot = u @ rho @ u.conj().T
    for name in ("cr_iq", "cmin_iq", "cl1_iq"):
        assert co.compute(name, rot, (2, 2)).value == pytest.approx(co.compute(name, rho, (2, 2)).value, abs=1e-9)
    assert co.cmax_iq(rot, (2, 2)).value == pytest.approx(co.cmax_iq(rho, (2, 2)).value, abs=1e-6)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_min_below_relative_below_max(seed):
    rho = st.ginibre(6, 1 + seed % 6, st.make_rng(seed))
    cmin = co.cmin_iq(rho, (3, 2)).value
    cr = co.cr_iq(rho, (3, 2)).value
    cmax = co.cmax_iq(rho, (3, 2)).value
    assert cmin <= cr + 1e-9
    assert cr <= cmax + 1e-6


def test_cmin_against_sampled_iq_states():
    rng = st.make_rng(2)
    rho = st.ginibre(4, 2, rng)
    value = co.cmin_iq(rho, (2, 2)).value
    proj = la.support_projector(rho)
    for _ in range(200):
        sigma = st.random_iq(2, 2, rng)
        assert -np.log2(np.trace(proj @ sigma).real) >= value - 1e-9


def test_cmin_attained_by_block_vector():
    rho = st.ginibre(4, 2, st.make_rng(3))
    rep = co.cmin_iq(rho, (2, 2))
    i = rep.meta["block"]
    bl = la.blocks(la.support_projector(rho), (2, 2))[i, i]
    _, v = la.eigh(bl)
    sigma = np.kron(np.diag(np.eye(2)[i]), la.ket_to_dm(v[:, 0]))
    assert -np.log2(np.trace(la.support_projector(rho) @ sigma).real) == pytest.approx(rep.value, abs=1e-10)


def test_roc_matches_robustness():
    for seed in range(3):
        rho = st.ginibre(3, 3 - seed, st.make_rng(50 + seed))
        assert co.roc(rho).value == pytest.approx(oracles.robustness_of_coherence(rho), abs=1e-6)


def test_weight_matches_oracle():
    for seed in range(3):
        rho = st.ginibre(3, 1 + seed, st.make_rng(60 + seed))
        assert co.c_w(rho).value == pytest.approx(1 - oracles.max_diagonal_subtraction(rho), abs=1e-6)


def test_robustness_l1_sandwich():
    # C_l1/(d-1) <= ROC <= C_l1
    for seed in range(5):
        rho = st.ginibre(3, 3, st.make_rng(70 + seed))
        r = co.roc(rho).value
        assert co.c_l1(rho).value / 2 - 1e-7 <= r <= co.c_l1(rho).value + 1e-7


def test_single_roofs_bracket_relative_entropy():
    rho = st.ginibre(3, 2, st.make_rng(80))
    cr = co.c_r(rho).value
    assert co.c_f(rho, FAST).value >= cr - 1e-9
    ca = co.c_a(rho, FAST).value
    assert ca <= co.c_a_reg(rho).value + 1e-9
    assert co.c_f(rho, FAST).value <= ca + 1e-9


def test_iq_roofs_bound_directions():
    rho = st.ginibre(4, 2, st.make_rng(81))
    f = co.cf_iq(rho, (2, 2), FAST)
    a = co.ca_iq(rho, (2, 2), FAST)
    assert f.bound_direction == "upper" and a.bound_direction == "lower"
    assert co.cr_iq(rho, (2, 2)).value - 1e-9 <= f.value <= a.value + 1e-9


def test_q_l1_product_state_is_zero():
    rng = st.make_rng(90)
    rho = np.kron(st.ginibre(2, 2, rng), st.ginibre(2, 2, rng))
    assert co.q_l1(rho, (2, 2)).value == pytest.approx(0, abs=1e-9)


def test_q_l1_bell_is_basis_independent():
    assert co.q_l1(BELL).value == pytest.approx(1, abs=1e-6)


def test_q_l1_below_computational_basis():
    rho = st.ginibre(6, 3, st.make_rng(91))
    rep = co.q_l1(rho, (3, 2), RoofConfig(restarts=4))
    assert rep.value <= co.cl1_iq(rho, (3, 2)).value + 1e-12
    u = np.array(rep.meta["basis"])
    big = np.kron(u.conj().T, np.eye(2))
    assert co.cl1_iq(big @ rho @ big.conj().T, (3, 2)).value == pytest.approx(rep.value, abs=1e-9)


def test_bipartition_parse():
    assert co.Bipartition.parse("2x3").dims == (2, 3)
    assert co.Bipartition.parse("2x2x2").dims == (2, 4)
    with pytest.raises(DimensionMismatch):
        co.Bipartition.parse("2by2")
    with pytest.raises(DimensionMismatch):
        co.cr_iq(np.eye(4) / 4)
    with pytest.raises(DimensionMismatch):
        co.cr_iq(np.eye(4) / 4, (3, 2))


def test_compute_dispatch():
    assert set(co.measure_names()) >= {"cr_iq", "c_w", "e_f", "purity_gap"}
    assert co.compute("cl1_iq", BELL).value == pytest.approx(1)
    assert co.compute("c_l1", np.eye(2) / 2).value == 0
    assert co.compute("purity_gap", BELL).value == pytest.approx(0.5)
    with pytest.raises(UnknownMeasure):
        co.compute("nope", BELL)


def test_report_as_dict():
    d = co.cr_iq(BELL).as_dict()
    assert d["measure"] == "cr_iq" and d["bound_direction"] == "exact"
