import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from byzfuse.belief import (
    BeliefError,
    ConditionalReportRates,
    HumanState,
    delta_lr,
    human_first_step,
    human_step,
    human_window_init,
    initial_belief,
    report_rates,
    update_belief,
    update_q_r,
)
from byzfuse.model import OperatingPoint
from oracles import DEFAULT_HUMAN_AVG, DEFAULT_SENSOR_OP, enumerate_window

prob = st.floats(0.0, 1.0)
inner = st.floats(0.01, 0.99)
belief = st.floats(1e-6, 1e6)
bit = st.integers(0, 1)


def make_state(connected=(0,), beta=0.8, gamma=0.2, alpha_e=0.5, pi1=0.5):
    state = HumanState(id=0, connected=list(connected), xi=1.0, beta=beta, gamma=gamma)
    return human_window_init(state, alpha_e, pi1)


def test_report_rates_examples(sensor_op):
    r = report_rates(sensor_op)
    assert (r.d_b, r.f_b) == pytest.approx((0.1212, 0.9515), abs=1e-4)
    assert report_rates(OperatingPoint(0.5, 0.5)) == ConditionalReportRates(0.5, 0.5, 0.5, 0.5)
    assert report_rates(OperatingPoint(1.0, 0.0)) == ConditionalReportRates(1.0, 0.0, 0.0, 1.0)


def test_q_r_examples(sensor_op):
    rates = report_rates(sensor_op)
    q, r = update_q_r(0.5, rates)
    assert (q, r) == pytest.approx((0.4637, 0.5363), abs=1e-4)
    assert q + r == pytest.approx(1.0, abs=1e-15)
    # oracle: enumerate P(u=1 | identity) over both hypotheses
    pd, pf = DEFAULT_SENSOR_OP
    assert q == pytest.approx(0.5 * pd + 0.5 * pf, abs=1e-15)
    assert r == pytest.approx(0.5 * (1 - pd) + 0.5 * (1 - pf), abs=1e-15)
    assert update_q_r(1.0, rates) == (rates.d_h, rates.d_b)
    assert update_q_r(0.0, rates) == (rates.f_h, rates.f_b)
    with pytest.raises(BeliefError):
        update_q_r(1.5, rates)


def test_update_belief_examples():
    assert update_belief(1.0, 1, 0.8, 0.2) == pytest.approx(4.0)
    assert update_belief(3.0, 0, 0.3, 0.3) == 3.0
    with pytest.raises(BeliefError):
        update_belief(1.0, 1, 0.5, 0.0)


def test_two_step_batch_product(sensor_op):
    rates = report_rates(sensor_op)
    w0 = 2.5
    q1, r1 = update_q_r(0.5, rates)
    q2, r2 = update_q_r(0.8, rates)
    w = update_belief(update_belief(w0, 1, q1, r1), 0, q2, r2)
    assert w == pytest.approx(w0 * (q1 / r1) * ((1 - q2) / (1 - r2)), rel=1e-12)


def test_delta_examples(sensor_op):
    rates = report_rates(sensor_op)
    assert delta_lr(1.0, 1, rates) == pytest.approx(1.0, abs=1e-15)
    assert delta_lr(1e15, 1, rates) == pytest.approx(rates.d_h / rates.f_h, rel=1e-9)
    assert delta_lr(0.0, 1, rates) == pytest.approx(0.1274, abs=1e-4)


def test_initial_belief():
    assert initial_belief(0.5) == 1.0
    assert initial_belief(0.1) == pytest.approx(9.0)
    assert initial_belief(0.9) == pytest.approx(1 / 9)
    for bad in (0.0, 1.0):
        with pytest.raises(BeliefError):
            initial_belief(bad)


def test_first_step_examples():
    state, d = human_first_step(make_state(), 1)
    assert state.lam == pytest.approx(4.0) and d == 1
    state, d = human_first_step(make_state(), 0)
    assert state.lam == pytest.approx(0.25) and d == 0
    for b in (0, 1):
        state, _ = human_first_step(make_state(beta=0.6, gamma=0.6, pi1=0.3), b)
        assert state.lam == pytest.approx(0.3 / 0.7)


def test_first_step_tie_decides_one():
    state, d = human_first_step(make_state(beta=0.5, gamma=0.5), 1, kappa_prime=1.0)
    assert state.log_lambda == 0.0 and d == 1


def test_all_excluded_uninformative_human(sensor_op):
    rates = report_rates(sensor_op)
    state, d0 = human_first_step(make_state(connected=(0, 1), beta=0.4, gamma=0.4), 1)
    before = state.log_lambda
    state, d = human_step(state, 0, {0: 1, 1: 0}, {0: rates, 1: rates}, excluded={0, 1})
    assert state.log_lambda == before and d == d0


def test_single_sensor_at_max_uncertainty(sensor_op):
    rates = report_rates(sensor_op)
    state, _ = human_first_step(make_state(beta=0.5, gamma=0.5), 1)
    before = state.log_lambda
    state, _ = human_step(state, 1, {0: 1}, {0: rates})
    assert state.log_lambda == pytest.approx(before, abs=1e-15)


def test_missing_report_raises(sensor_op):
    rates = report_rates(sensor_op)
    state, _ = human_first_step(make_state(connected=(0, 1)), 1)
    with pytest.raises(BeliefError):
        human_step(state, 1, {0: 1}, {0: rates, 1: rates})


def test_no_connected_sensors_rejected():
    with pytest.raises(BeliefError):
        HumanState(id=3, connected=[], xi=1.0, beta=0.8, gamma=0.2)


def run_scalar(b_seq, u_seq, beta, gamma, op, alpha_e, pi1=0.5):
    rates = report_rates(op)
    n = len(u_seq[0])
    state = make_state(connected=range(n), beta=beta, gamma=gamma, alpha_e=alpha_e, pi1=pi1)
    state, _ = human_first_step(state, b_seq[0])
    lams = [state.lam]
    for b, u in zip(b_seq[1:], u_seq[1:]):
        state, _ = human_step(state, b, dict(enumerate(u)), {i: rates for i in range(n)})
        lams.append(state.lam)
    return lams


@given(
    st.lists(bit, min_size=3, max_size=3),
    st.lists(st.tuples(bit, bit), min_size=3, max_size=3),
    st.floats(0.05, 0.95),
    st.floats(0.05, 0.95),
    st.floats(0.05, 0.95),
)
def test_sequential_matches_enumeration(b_seq, u_seq, beta, gamma, alpha_e):
    op = OperatingPoint(*DEFAULT_SENSOR_OP)
    lams = run_scalar(b_seq, u_seq, beta, gamma, op, alpha_e)
    odds = enumerate_window(b_seq, u_seq, beta, gamma, op.pd, op.pf, alpha_e)
    for got, want in zip(lams, odds):
        assert got == pytest.approx(want, rel=1e-10)


# properties


@given(inner, bit, belief)
def test_uninformative_report_keeps_belief(q, u, w):
    assert update_belief(w, u, q, q) == pytest.approx(w, rel=1e-15)


@given(prob, prob, bit)
def test_delta_is_one_at_equal_odds(pd, pf, u):
    rates = report_rates(OperatingPoint(pd, pf))
    try:
        val = delta_lr(1.0, u, rates)
    except BeliefError:
        return
    assert val == pytest.approx(1.0, abs=1e-12)


@given(inner, inner, belief, bit)
def test_belief_monotone_in_report(q, r, w, u):
    # gaps below double resolution make the ratio round to one
    if q <= r + 1e-9:
        return
    new = update_belief(w, u, q, r)
    assert new > w if u else new < w


@given(
    st.floats(0.55, 0.99),
    st.floats(0.01, 0.45),
    st.floats(0.05, 0.95),
    st.floats(0.05, 0.95),
    st.lists(st.tuples(bit, bit, bit), min_size=2, max_size=10),
)
def test_log_lambda_matches_batch_product(pd, pf, beta, gamma, steps):
    rates = report_rates(OperatingPoint(pd, pf))
    state, _ = human_first_step(make_state(connected=(0, 1), beta=beta, gamma=gamma), steps[0][0])
    # batch oracle: recompute every factor from a replay of (pi1, w) in plain floats
    log_terms = [math.log(0.5 / 0.5), math.log(beta / gamma) if steps[0][0] else math.log((1 - beta) / (1 - gamma))]
    pi1 = math.exp(sum(log_terms)) / (1 + math.exp(sum(log_terms)))
    w = {0: 1.0, 1: 1.0}
    for b, u0, u1 in steps[1:]:
        state, _ = human_step(state, b, {0: u0, 1: u1}, {0: rates, 1: rates})
        log_terms.append(math.log(beta / gamma) if b else math.log((1 - beta) / (1 - gamma)))
        q, r = update_q_r(pi1, rates)
        for i, u in ((0, u0), (1, u1)):
            log_terms.append(math.log(delta_lr(w[i], u, rates)))
            w[i] = update_belief(w[i], u, q, r)
        s = math.fsum(log_terms)
        pi1 = 1 / (1 + math.exp(-s))
    assert state.log_lambda == pytest.approx(math.fsum(log_terms), rel=1e-12, abs=1e-12)
    assert state.beliefs == pytest.approx(w, rel=1e-12)


def test_honest_belief_drift_positive(sensor_op):
    # full recursion under H1: the human's own decisions move the prior towards H1
    rates = report_rates(sensor_op)
    rng = np.random.default_rng(11)
    beta, gamma = DEFAULT_HUMAN_AVG
    drifts = []
    for _ in range(4000):
        state, _ = human_first_step(make_state(beta=beta, gamma=gamma), int(rng.random() < beta))
        logs = []
        for _ in range(9):
            u = int(rng.random() < sensor_op.pd)
            state, _ = human_step(state, int(rng.random() < beta), {0: u}, {0: rates})
            logs.append(math.log(state.beliefs[0]))
        drifts.append(np.diff([0.0] + logs).mean())
    drifts = np.asarray(drifts)
    assert drifts.mean() - 3 * drifts.std(ddof=1) / math.sqrt(drifts.size) > 0
