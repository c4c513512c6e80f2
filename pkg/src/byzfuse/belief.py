"""Per-human windowed belief updating over connected physical sensors.

Scalar reference implementation. Each human keeps, for every connected
sensor, the odds ``w`` that the sensor is honest, and a running
log-likelihood ratio for the hypothesis. After every update of the LR the
posterior ``lambda / (1 + lambda)`` becomes the prior for the next step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.special import expit

from .model import OperatingPoint, clamp_probability


class BeliefError(ValueError):
    pass


@dataclass(frozen=True)
class ConditionalReportRates:
    """P(report = 1) for an honest (``*_h``) or Byzantine (``*_b``) sensor under H1 (``d``) / H0 (``f``)."""

    d_h: float
    f_h: float
    d_b: float
    f_b: float


@dataclass
class HumanState:
    id: int
    connected: list[int]
    xi: float
    beta: float
    gamma: float
    log_lambda: float = 0.0
    pi1: float = 0.5
    beliefs: dict[int, float] = field(default_factory=dict)
    decision: int = 0

    def __post_init__(self):
        if not self.connected:
            raise BeliefError(f"human {self.id} has no connected sensors")

    @property
    def lam(self) -> float:
        return math.exp(self.log_lambda)

    @property
    def pi0(self) -> float:
        return 1.0 - self.pi1


def report_rates(op: OperatingPoint) -> ConditionalReportRates:
    """Report rates under the flipping attack (Byzantines send ``1 - v``)."""
    return ConditionalReportRates(d_h=op.pd, f_h=op.pf, d_b=1.0 - op.pd, f_b=1.0 - op.pf)


def update_q_r(pi1: float, rates: ConditionalReportRates) -> tuple[float, float]:
    """P(u=1 | honest) and P(u=1 | Byzantine), marginalizing the hypothesis with prior ``pi1``."""
    if not 0.0 <= pi1 <= 1.0:
        raise BeliefError(f"prior out of range: {pi1}")
    pi0 = 1.0 - pi1
    q = pi1 * rates.d_h + pi0 * rates.f_h
    r = pi1 * rates.d_b + pi0 * rates.f_b
    return q, r


def update_belief(w_prev: float, u: int, q: float, r: float) -> float:
    if u:
        if r <= 0.0:
            raise BeliefError("degenerate report rates: r = 0")
        return w_prev * (q / r)
    if r >= 1.0:
        raise BeliefError("degenerate report rates: r = 1")
    return w_prev * ((1.0 - q) / (1.0 - r))


def delta_lr(w: float, u: int, rates: ConditionalReportRates) -> float:
    """LR of a single report, mixing over the sensor's identity with odds ``w``."""
    if u:
        num = rates.d_b + rates.d_h * w
        den = rates.f_b + rates.f_h * w
    else:
        num = (1.0 - rates.d_b) + (1.0 - rates.d_h) * w
        den = (1.0 - rates.f_b) + (1.0 - rates.f_h) * w
    if den <= 0.0 or num <= 0.0:
        raise BeliefError("degenerate operating point in report LR")
    return num / den


def initial_belief(alpha_e: float) -> float:
    if not 0.0 < alpha_e < 1.0:
        raise BeliefError(f"alpha_e must lie strictly inside (0, 1), got {alpha_e}")
    return (1.0 - alpha_e) / alpha_e


def human_window_init(state: HumanState, alpha_e: float, pi1: float = 0.5) -> HumanState:
    w0 = initial_belief(alpha_e)
    state.beliefs = {i: w0 for i in state.connected}
    state.pi1 = pi1
    state.log_lambda = math.log(pi1) - math.log1p(-pi1)
    return state


def _human_log_term(state: HumanState, b: int) -> float:
    beta = clamp_probability(state.beta)
    gamma = clamp_probability(state.gamma)
    if b:
        return math.log(beta) - math.log(gamma)
    return math.log1p(-beta) - math.log1p(-gamma)


def _decide(state: HumanState, kappa_prime: float) -> int:
    state.pi1 = float(expit(state.log_lambda))
    state.decision = int(state.log_lambda >= math.log(kappa_prime))
    return state.decision


def human_first_step(state: HumanState, b: int, kappa_prime: float = 1.0) -> tuple[HumanState, int]:
    """First step of a window: only the human's own decision enters."""
    state.log_lambda = math.log(state.pi1) - math.log1p(-state.pi1) + _human_log_term(state, b)
    return state, _decide(state, kappa_prime)


def human_step(
    state: HumanState,
    b: int,
    reports: dict[int, int],
    rates: dict[int, ConditionalReportRates],
    kappa_prime: float = 1.0,
    excluded: frozenset[int] | set[int] = frozenset(),
) -> tuple[HumanState, int]:
    """Subsequent steps: fold in the human's decision and every connected report.

    For each non-excluded sensor the report LR is computed from the belief
    held before this step, then the belief is updated with the report.
    """
    log_lambda = state.log_lambda + _human_log_term(state, b)
    for i in state.connected:
        if i in excluded:
            continue
        if i not in reports:
            raise BeliefError(f"missing report from sensor {i} at human {state.id}")
        u = reports[i]
        q, r = update_q_r(state.pi1, rates[i])
        w = state.beliefs[i]
        log_lambda += math.log(delta_lr(w, u, rates[i]))
        state.beliefs[i] = update_belief(w, u, q, r)
    state.log_lambda = log_lambda
    return state, _decide(state, kappa_prime)
