"""Fusion-center vote, sensor reputations and Byzantine identification."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

REPUTATION_RULES = ("sign", "count")


class FusionError(ValueError):
    pass


@dataclass
class FcState:
    n_sensors: int
    kappa: float
    eta: float = 0.2
    delta_step: float = 0.03
    rule: str = "sign"
    reputations: np.ndarray = None
    identified: set = field(default_factory=set)

    def __post_init__(self):
        if self.rule not in REPUTATION_RULES:
            raise FusionError(f"unknown reputation rule {self.rule!r}")
        if self.reputations is None:
            self.reputations = np.ones(self.n_sensors)


def fc_decide(decisions: Sequence[int], kappa: float) -> int:
    """Vote of the human decisions; a tie at ``kappa`` decides H1."""
    decisions = np.asarray(decisions)
    if decisions.size == 0:
        raise FusionError("empty decision vector")
    return int(decisions.sum() >= kappa)


def indicator(w: float) -> int:
    return 1 if w > 1 else -1


def reputation_increment(votes: Sequence[int], delta_step: float, rule: str = "sign") -> float:
    """Reputation change of one sensor given the ±1 votes of its connected humans.

    ``sign``: ``c = sum(votes)``; ``+delta * c/n`` when ``c > 0`` else
    ``-delta * (1 - c/n)``, so the increment lies in ``[-2 delta, delta]``.
    ``count``: same shape on ``h = #(+1 votes)`` with a strict-majority test.
    """
    n = len(votes)
    if n == 0:
        raise FusionError("sensor has no connected humans")
    if rule == "sign":
        c = float(sum(votes))
        return delta_step * c / n if c > 0 else -delta_step * (1.0 - c / n)
    if rule == "count":
        h = float(sum(1 for v in votes if v > 0))
        return delta_step * h / n if h > n / 2 else -delta_step * (1.0 - h / n)
    raise FusionError(f"unknown reputation rule {rule!r}")


def reputation_update(
    fc: FcState,
    snapshot: Mapping[tuple[int, int], float],
    sensor_humans: Sequence[Sequence[int]],
) -> FcState:
    """Apply one window of reputation updates.

    ``snapshot`` maps ``(human, sensor)`` edges to end-of-window beliefs;
    ``sensor_humans[i]`` lists the humans connected to sensor ``i``.
    """
    for i, humans in enumerate(sensor_humans):
        if not humans:
            raise FusionError(f"sensor {i} has no connected humans")
        try:
            votes = [indicator(snapshot[(m, i)]) for m in humans]
        except KeyError as exc:
            raise FusionError(f"belief snapshot missing edge {exc.args[0]}") from None
        fc.reputations[i] += reputation_increment(votes, fc.delta_step, fc.rule)
    identify(fc)
    return fc


def identify(fc: FcState, eta: float | None = None) -> set:
    """Sensors whose reputation fell strictly below ``eta``; the set only grows."""
    eta = fc.eta if eta is None else eta
    fc.identified |= {int(i) for i in np.flatnonzero(fc.reputations < eta)}
    return fc.identified
