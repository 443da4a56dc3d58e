import math
import random

import numpy as np
import pytest

from hcrphmm.diagnostics import (LengthMismatchError, ZeroVarianceError,
                                 autocorrelation_time, mutual_information,
                                 perplexity)


def entropy(seq):
    n = len(seq)
    counts = {}
    for v in seq:
        counts[v] = counts.get(v, 0) + 1
    return -sum(c / n * math.log(c / n) for c in counts.values())


def test_mi_of_identical_sequences_is_entropy():
    rng = random.Random(3)
    seq = [rng.randrange(5) for _ in range(2000)]
    assert mutual_information(seq, seq) == pytest.approx(entropy(seq), abs=1e-9)


def test_mi_constant_sequence_is_zero():
    rng = random.Random(5)
    other = [rng.randrange(4) for _ in range(500)]
    assert mutual_information([7] * 500, other) == pytest.approx(0.0, abs=1e-12)


def test_mi_hand_computed_joint():
    # joint counts {(0,0):2, (0,1):1, (1,1):1}
    a = [0, 0, 0, 1]
    b = [0, 0, 1, 1]
    expected = (0.5 * math.log(0.5 / (0.75 * 0.5))
                + 0.25 * math.log(0.25 / (0.75 * 0.5))
                + 0.25 * math.log(0.25 / (0.25 * 0.5)))
    assert mutual_information(a, b) == pytest.approx(expected, abs=1e-12)


def test_mi_symmetric_and_relabel_invariant():
    rng = random.Random(7)
    a = [rng.randrange(4) for _ in range(800)]
    b = [rng.randrange(3) for _ in range(800)]
    mi = mutual_information(a, b)
    assert mi >= -1e-12
    assert mutual_information(b, a) == pytest.approx(mi, abs=1e-12)
    relabel = {0: 17, 1: -4, 2: 99, 3: 5}
    assert mutual_information([relabel[v] for v in a], b) == pytest.approx(
        mi, abs=1e-12)


def test_mi_length_mismatch():
    with pytest.raises(LengthMismatchError):
        mutual_information([1, 2], [1])
    with pytest.raises(LengthMismatchError):
        mutual_information([], [])


def test_act_iid_is_half():
    # summing 1000 empirical autocorrelations adds noise ~sqrt(1000/n), so a
    # million points keep the 0.1 band at roughly three sigmas
    rng = np.random.default_rng(11)
    x = rng.standard_normal(1_000_000)
    assert autocorrelation_time(x) == pytest.approx(0.5, abs=0.1)


def test_act_ar1_matches_analytic():
    # AR(1) with coefficient 0.5: ACT = 1/2 + sum rho^t = 1.5
    rng = np.random.default_rng(13)
    n = 1_000_000
    noise = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = noise[0]
    rho = 0.5
    for i in range(1, n):
        x[i] = rho * x[i - 1] + noise[i]
    act = autocorrelation_time(x)
    assert abs(act - 1.5) < 0.15


def test_act_constant_series_raises():
    with pytest.raises(ZeroVarianceError):
        autocorrelation_time([4.0] * 100)


def test_act_reversal_invariance():
    rng = np.random.default_rng(17)
    x = np.cumsum(rng.standard_normal(5000))
    assert autocorrelation_time(x[::-1]) == pytest.approx(
        autocorrelation_time(x), abs=1e-9)


def test_ppl_all_ones():
    assert perplexity([[1.0] * 10]) == pytest.approx(1.0, abs=1e-12)


def test_ppl_uniform_model_equals_alphabet_size():
    rows = [[1 / 1487] * 64]
    assert perplexity(rows) == pytest.approx(1487.0, rel=1e-9)


def test_ppl_zero_likelihood_is_infinite_with_warning():
    with pytest.warns(UserWarning, match="position 2"):
        assert perplexity([[0.5, 0.5, 0.0, 0.5]]) == math.inf


def test_ppl_model_averaging_matches_direct_recomputation():
    rng = random.Random(19)
    rows = [[rng.random() for _ in range(30)] for _ in range(4)]
    got = perplexity(rows)
    mean = [sum(row[t] for row in rows) / 4 for t in range(30)]
    direct = math.exp(-sum(math.log(v) for v in mean) / 30)
    assert got == pytest.approx(direct, rel=1e-12)
