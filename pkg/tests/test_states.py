import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from iqcoherence import linalg as la
from iqcoherence import states as st
from iqcoherence.errors import DimensionMismatch, NormalizationError, NotAState, ParseError, RangeError


def test_bell_vectors():
    assert np.allclose(st.bell_phi_plus().rho, la.ket_to_dm(np.array([1, 0, 0, -1]) / np.sqrt(2)))
    assert np.allclose(st.psi_plus().rho, la.ket_to_dm(np.array([0, 1, -1, 0]) / np.sqrt(2)))
    assert st.bell_phi_plus().dims == (2, 2)


def test_rho_lambda_endpoints_and_range():
    assert np.allclose(st.rho_lambda(1).rho, st.bell_phi_plus().rho)
    assert np.allclose(st.rho_lambda(0).rho, st.psi_plus().rho)
    half = st.rho_lambda(0.5).rho
    assert la.rank(half) == 2
    with pytest.raises(RangeError):
        st.rho_lambda(1.5)


def test_schmidt_pure():
    u = [np.array([1, 0]), np.array([1, 1]) / np.sqrt(2)]
    s = st.schmidt_pure([0.25, 0.75], u)
    assert np.allclose(np.diag(la.partial_trace(s.rho, (2, 2), 0)).real, [0.25, 0.75])
    with pytest.raises(NormalizationError):
        st.schmidt_pure([0.5, 0.6], u)
    with pytest.raises(DimensionMismatch):
        st.schmidt_pure([1.0], u)


def test_validate_rejects_bad_input():
    with pytest.raises(NotAState):
        st.validate(np.diag([0.6, 0.6]))
    with pytest.raises(NotAState):
        st.validate(np.diag([1.5, -0.5]))
    with pytest.raises(DimensionMismatch):
        st.validate(np.eye(4) / 4, (2, 3))
    with pytest.raises(NormalizationError):
        st.pure(np.zeros(2))


def test_state_is_read_only():
    s = st.bell_phi_plus()
    with pytest.raises(ValueError):
        s.rho[0, 0] = 1


def test_reduced():
    r = st.bell_phi_plus().reduced(1)
    assert r.dims == (2,)
    assert np.allclose(r.rho, np.eye(2) / 2)


def test_trial_seed_streams():
    assert st.trial_seed(0, 0) == st.trial_seed(0, 0)
    assert len({st.trial_seed(0, k) for k in range(50)}) == 50
    assert st.trial_seed(0, 1) != st.trial_seed(1, 1)


def test_make_rng_deterministic():
    a = st.make_rng(7).standard_normal(5)
    b = st.make_rng(7).standard_normal(5)
    assert np.array_equal(a, b)


def test_ginibre_rank_and_state():
    rho = st.ginibre(4, 2, st.make_rng(1))
    assert la.rank(rho) == 2
    la.check_state(rho)


def test_random_iq_block_diagonal():
    rho = st.random_iq(3, 2, st.make_rng(2))
    la.check_state(rho)
    assert np.allclose(la.dephase(rho, (3, 2), [0]), rho)


def test_random_incoherent_diagonal():
    rho = st.random_incoherent(4, st.make_rng(3))
    assert np.allclose(rho, np.diag(np.diag(rho)))


@pytest.mark.parametrize("kind", ["haar-pure", "ginibre-mixed", "random-iq", "random-incoherent"])
def test_sample_kinds(kind):
    spec = st.EnsembleSpec(kind, (2, 3), count=4, seed=5)
    out = list(st.sample(spec))
    assert len(out) == 4
    for s in out:
        assert s.dims == (2, 3)
        la.check_state(s.rho)
    again = list(st.sample(spec))
    assert all(np.array_equal(a.rho, b.rho) for a, b in zip(out, again))


def test_sample_pure_has_rank_one():
    for s in st.sample(st.EnsembleSpec("haar-pure", (2, 2), count=3)):
        assert la.rank(s.rho) == 1


def test_sample_named():
    s = next(st.sample(st.EnsembleSpec("named", (2, 2), name="rho_lambda", params={"lambda": 0.3})))
    assert np.allclose(s.rho, st.rho_lambda(0.3).rho)
    with pytest.raises(RangeError):
        st.named_state("nope")


def test_ensemble_spec_checks():
    with pytest.raises(RangeError):
        st.EnsembleSpec("unknown", (2,))
    with pytest.raises(RangeError):
        st.EnsembleSpec("ginibre-mixed", (2, 2), rank=5)
    with pytest.raises(RangeError):
        st.EnsembleSpec("random-iq", (2, 2, 2))
    with pytest.raises(RangeError):
        st.EnsembleSpec("haar-pure", (2,), count=0)


@given(hst.integers(0, 2**40))
@settings(max_examples=25, deadline=None)
def test_save_load_round_trip_exact(seed):
    s = st.validate(st.ginibre(6, 3, st.make_rng(seed)), (2, 3))
    back = st.state_from_json(json.loads(json.dumps(st.state_to_json(s))))
    assert back.dims == s.dims
    assert np.array_equal(back.rho, s.rho)


def test_save_load_file(tmp_path):
    s = st.rho_lambda(0.2)
    p = tmp_path / "s.json"
    st.save(s, p)
    assert np.array_equal(st.load(p).rho, s.rho)


def test_load_malformed(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        st.load(p)
    with pytest.raises(ParseError):
        st.state_from_json({"dims": [2]})
    with pytest.raises(ParseError):
        st.state_from_json({"dims": [2], "matrix": [[[1, 0, 0], [0, 0]], [[0, 0], [0, 0]]]})
