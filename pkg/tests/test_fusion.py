import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from byzfuse.fusion import (
    FcState,
    FusionError,
    fc_decide,
    identify,
    indicator,
    reputation_increment,
    reputation_update,
)

votes = st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=40)
step = st.floats(1e-4, 1.0)


def test_fc_decide_examples():
    assert fc_decide([1] * 11 + [0] * 9, 10) == 1
    assert fc_decide([1] * 9 + [0] * 11, 10) == 0
    assert fc_decide([1] * 10 + [0] * 10, 10) == 1
    with pytest.raises(FusionError):
        fc_decide([], 1)


def test_indicator_examples():
    assert indicator(1.0001) == 1
    assert indicator(1.0) == -1
    assert indicator(0.2) == -1


def test_increment_examples():
    assert reputation_increment([1, 1, 1, 1], 0.03) == pytest.approx(0.03)
    assert reputation_increment([-1, -1, -1, -1], 0.03) == pytest.approx(-0.06)
    assert reputation_increment([1, -1], 0.03) == pytest.approx(-0.03)
    with pytest.raises(FusionError):
        reputation_increment([], 0.03)
    with pytest.raises(FusionError):
        reputation_increment([1], 0.03, rule="median")


def test_count_rule_examples():
    assert reputation_increment([1, 1, 1, -1], 0.04, rule="count") == pytest.approx(0.03)
    assert reputation_increment([1, 1, -1, -1], 0.04, rule="count") == pytest.approx(-0.02)
    assert reputation_increment([-1, -1], 0.04, rule="count") == pytest.approx(-0.04)


def test_single_human_crossing_after_14_windows():
    fc = FcState(n_sensors=1, kappa=0.5, eta=0.2, delta_step=0.03)
    crossed = None
    for window in range(1, 30):
        reputation_update(fc, {(0, 0): 0.5}, [[0]])
        if fc.identified and crossed is None:
            crossed = window
    assert crossed == math.ceil(0.8 / 0.06) == 14


def test_identify_examples():
    fc = FcState(n_sensors=3, kappa=1.0)
    assert identify(fc) == set()
    fc.reputations[:] = [0.19, 0.2, 1.0]
    assert identify(fc) == {0}


def test_update_missing_edge():
    fc = FcState(n_sensors=2, kappa=1.0)
    with pytest.raises(FusionError):
        reputation_update(fc, {(0, 0): 2.0}, [[0], [0]])
    with pytest.raises(FusionError):
        reputation_update(fc, {(0, 0): 2.0}, [[0], []])
    with pytest.raises(FusionError):
        FcState(n_sensors=1, kappa=1.0, rule="median")


# properties


@given(votes, step, st.sampled_from(["sign", "count"]))
def test_increment_bounds(v, delta, rule):
    a = reputation_increment(v, delta, rule)
    assert -2 * delta - 1e-15 <= a <= delta + 1e-15


@given(st.lists(st.integers(0, 1), min_size=1, max_size=60), st.floats(0.0, 60.0), st.randoms())
def test_fc_decide_permutation_invariant(d, kappa, rnd):
    shuffled = list(d)
    rnd.shuffle(shuffled)
    assert fc_decide(d, kappa) == fc_decide(shuffled, kappa)


@given(st.lists(st.lists(st.floats(0.01, 10.0), min_size=3, max_size=3), min_size=1, max_size=40))
def test_identified_set_monotone(windows):
    fc = FcState(n_sensors=3, kappa=0.5, eta=0.9, delta_step=0.05)
    seen = set()
    for beliefs in windows:
        reputation_update(fc, {(0, i): w for i, w in enumerate(beliefs)}, [[0], [0], [0]])
        assert seen <= fc.identified
        seen = set(fc.identified)
    # identification persists even if reputations recover
    fc.reputations[:] = 1.0
    assert identify(fc) >= seen


def test_honest_sensor_rarely_identified():
    # an honest sensor watched by one human that usually believes it
    rng = np.random.default_rng(3)
    flagged = 0
    runs = 1000
    for _ in range(runs):
        fc = FcState(n_sensors=1, kappa=0.5)
        for _ in range(50):
            w = 3.0 if rng.random() < 0.9 else 0.5
            reputation_update(fc, {(0, 0): w}, [[0]])
        flagged += bool(fc.identified)
    assert flagged / runs < 0.01
