"""Reference fusion rules: Chair-Varshney (CV), majority (MR), majority of humans (MRH).

The estimators take one row per decision instant. Columns are the ``N``
sensor reports followed by the ``M`` raw human decisions; MRH only reads
the human block.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .model import OperatingPoint, clamp_probability
from .sideinfo import _check_bits


def sensor_report_mass(alpha: float, op: OperatingPoint) -> tuple[float, float]:
    """P(u=1|H1), P(u=1|H0) for a sensor that is Byzantine with probability ``alpha``."""
    p1 = (1.0 - alpha) * op.pd + alpha * (1.0 - op.pd)
    p0 = (1.0 - alpha) * op.pf + alpha * (1.0 - op.pf)
    return p1, p0


def _llr_weights(p1: float, p0: float) -> tuple[float, float]:
    p1, p0 = clamp_probability(p1), clamp_probability(p0)
    return math.log(p1) - math.log(p0), math.log1p(-p1) - math.log1p(-p0)


def cv_statistic(sensor_bits, human_bits, alpha, sensor_op, human_op, pi1=0.5):
    """Chair-Varshney log-likelihood statistic; rows are decision instants."""
    sensor_bits = np.atleast_2d(sensor_bits)
    human_bits = np.atleast_2d(human_bits)
    s1, s0 = _llr_weights(*sensor_report_mass(alpha, sensor_op))
    h1, h0 = _llr_weights(human_op.pd, human_op.pf)
    ns1 = sensor_bits.sum(axis=1)
    nh1 = human_bits.sum(axis=1)
    stat = ns1 * s1 + (sensor_bits.shape[1] - ns1) * s0
    stat = stat + nh1 * h1 + (human_bits.shape[1] - nh1) * h0
    pi1 = clamp_probability(pi1)
    return stat + (math.log(pi1) - math.log1p(-pi1))


def cv_fuse(sensor_bits, human_bits, alpha, sensor_op, human_op, pi1=0.5) -> int:
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return int(cv_statistic(sensor_bits, human_bits, alpha, sensor_op, human_op, pi1)[0] >= 0.0)


def mr_fuse(sensor_bits, human_bits) -> int:
    bits = np.concatenate([np.ravel(sensor_bits), np.ravel(human_bits)])
    return int(bits.sum() >= math.ceil(bits.size / 2))


def mrh_fuse(human_bits) -> int:
    human_bits = np.ravel(human_bits)
    return int(human_bits.sum() >= math.ceil(human_bits.size / 2))


class _BitFusion(ClassifierMixin, BaseEstimator):
    def _validate(self, X, reset):
        X = _check_bits(X)
        if reset:
            if X.shape[1] < self.n_humans:
                raise ValueError(f"need at least n_humans={self.n_humans} columns, got {X.shape[1]}")
            self.n_features_in_ = X.shape[1]
            self.n_sensors_ = X.shape[1] - self.n_humans
            self.classes_ = np.array([0, 1])
        elif X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return X

    def fit(self, X, y=None):
        self._validate(X, reset=True)
        return self

    def predict(self, X):
        check_is_fitted(self, "n_features_in_")
        X = self._validate(X, reset=False)
        return (self.decision_function(X) >= 0).astype(int)


class ChairVarshneyFusion(_BitFusion):
    """Optimal log-likelihood fusion of binary reports.

    Parameters
    ----------
    n_humans : int
        Number of trailing human columns.
    alpha : float
        Byzantine fraction assumed for every sensor (true or assumed value).
    sensor_op : OperatingPoint
        Honest sensor operating point.
    human_op : OperatingPoint
        Population-averaged human operating point.
    pi1 : float, default=0.5
    """

    def __init__(self, n_humans, alpha, sensor_op, human_op, pi1=0.5):
        self.n_humans = n_humans
        self.alpha = alpha
        self.sensor_op = sensor_op
        self.human_op = human_op
        self.pi1 = pi1

    def fit(self, X, y=None):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        return super().fit(X, y)

    def decision_function(self, X):
        X = np.asarray(X)
        n_s = X.shape[1] - self.n_humans
        return cv_statistic(X[:, :n_s], X[:, n_s:], self.alpha, self.sensor_op, self.human_op, self.pi1)


class MajorityVote(_BitFusion):
    """Majority over all columns, or over the human block only (``humans_only``).

    Ties (exactly half) decide H1.
    """

    def __init__(self, n_humans, humans_only=False):
        self.n_humans = n_humans
        self.humans_only = humans_only

    def decision_function(self, X):
        X = np.asarray(X)
        if self.humans_only:
            X = X[:, X.shape[1] - self.n_humans:]
        return X.sum(axis=1) - math.ceil(X.shape[1] / 2)
