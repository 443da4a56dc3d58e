import numpy as np
import pytest

from hcrphmm import HcrpHmm, check_sequence
from hcrphmm.data import sequence1
from hcrphmm.diagnostics import mutual_information


def test_check_sequence_accepts_arrays_and_lists():
    seq, n = check_sequence([0, 1, 2, 1])
    assert seq == [0, 1, 2, 1] and n == 3
    seq, n = check_sequence(np.array([[0], [1]]))
    assert seq == [0, 1] and n == 2


def test_check_sequence_rejects_bad_input():
    with pytest.raises(ValueError):
        check_sequence([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        check_sequence([0.5, 1.0])
    with pytest.raises(ValueError):
        check_sequence([-1, 0])
    with pytest.raises(ValueError):
        check_sequence([0, 5], n_symbols=3)


def test_get_set_params_round_trip():
    est = HcrpHmm(sampler="sgibbs", sweeps=7)
    params = est.get_params()
    assert params["sampler"] == "sgibbs" and params["sweeps"] == 7
    est.set_params(sweeps=9, block_size=4)
    assert est.sweeps == 9 and est.block_size == 4
    with pytest.raises(ValueError):
        est.set_params(bogus=1)


def test_sklearn_clone_compatibility():
    clone = pytest.importorskip("sklearn.base").clone

    est = HcrpHmm(sampler="beam", block_size=6, sweeps=5, random_state=3)
    cloned = clone(est)
    assert cloned.get_params() == est.get_params()


def test_unfitted_predict_raises():
    with pytest.raises(ValueError, match="not fitted"):
        HcrpHmm().predict()


def test_fit_predict_recovers_structure():
    y, truth = sequence1(160)
    est = HcrpHmm(sampler="beam", block_size=6, sm_per_sweep=2, sweeps=60,
                  init_particles=20, random_state=1)
    states = est.fit_predict(y)
    assert states.shape == (160,)
    assert est.n_states_ >= 4
    assert mutual_information(states, truth) > 0.8
    assert est.transform().shape == (160, 1)
    # deterministic re-fit
    again = HcrpHmm(**est.get_params()).fit(y).predict()
    assert (states == again).all()


def test_score_is_finite_log_likelihood():
    y, _ = sequence1(120)
    est = HcrpHmm(sampler="sgibbs", sweeps=20, init_particles=10,
                  random_state=2).fit(y)
    score = est.score(y[:40], n_particles=20)
    assert np.isfinite(score) and score < 0.0


def test_predict_rejects_other_sequences():
    y, _ = sequence1(60)
    est = HcrpHmm(sampler="sgibbs", sweeps=5, init_particles=5).fit(y)
    with pytest.raises(ValueError, match="fitted sequence"):
        est.predict(list(reversed(y)))
