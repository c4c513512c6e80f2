"""The hierarchical belief-updating fusion scheme as a scikit-learn estimator.

Input is a stack of windows ``X`` of shape ``(n_windows, T, N + M)``: for
every step, the ``N`` sensor reports followed by the ``M`` raw human
decisions. Fitting runs the windows in order and learns sensor
reputations (no labels are used); ``predict`` decides windows with the
learned exclusion set frozen.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import engine
from .belief import report_rates
from .model import OperatingPoint
from .topology import Topology


def check_windows(X, n_sensors: int, n_humans: int) -> np.ndarray:
    """Validate a window stack and return it as bool ``(n_windows, T, N + M)``."""
    X = check_array(X, dtype=np.int64, allow_nd=True, ensure_2d=False)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3:
        raise ValueError(f"expected (n_windows, T, N + M) array, got shape {X.shape}")
    if X.shape[2] != n_sensors + n_humans:
        raise ValueError(f"expected {n_sensors + n_humans} columns per step, got {X.shape[2]}")
    if not np.isin(X, (0, 1)).all():
        raise ValueError("window arrays must contain only 0/1")
    return X.astype(bool)


class HierarchicalBeliefFusion(ClassifierMixin, BaseEstimator):
    """Human belief updating over sensor reports, FC vote and reputation tracking.

    Parameters
    ----------
    topology : Topology
        Which sensors each human listens to.
    sensor_op : OperatingPoint
        Operating point of an honest sensor.
    human_beta, human_gamma : array-like of shape (M,)
        Per-human detection and false-alarm probabilities.
    alpha_e : float, default=0.5
        Byzantine fraction assumed when initializing beliefs.
    kappa : float or None, default=None
        FC vote threshold; ``None`` means ``M / 2``.
    kappa_prime : float, default=1.0
        Human LR threshold.
    eta : float, default=0.2
        Reputation below which a sensor is flagged.
    delta_step : float, default=0.03
        Reputation step size.
    window_pi1 : float, default=0.5
        Prior of H1 at the start of every window.
    reputation_rule : {"sign", "count"}, default="sign"
    """

    def __init__(
        self,
        topology: Topology,
        sensor_op: OperatingPoint,
        human_beta,
        human_gamma,
        alpha_e=0.5,
        kappa=None,
        kappa_prime=1.0,
        eta=0.2,
        delta_step=0.03,
        window_pi1=0.5,
        reputation_rule="sign",
    ):
        self.topology = topology
        self.sensor_op = sensor_op
        self.human_beta = human_beta
        self.human_gamma = human_gamma
        self.alpha_e = alpha_e
        self.kappa = kappa
        self.kappa_prime = kappa_prime
        self.eta = eta
        self.delta_step = delta_step
        self.window_pi1 = window_pi1
        self.reputation_rule = reputation_rule

    def _setup(self):
        topo = self.topology
        beta = np.asarray(self.human_beta, dtype=float)
        gamma = np.asarray(self.human_gamma, dtype=float)
        if beta.shape != (topo.n_humans,) or gamma.shape != (topo.n_humans,):
            raise ValueError(f"human_beta/human_gamma must have shape ({topo.n_humans},)")
        self.params_ = engine.BeliefParams(
            rates=report_rates(self.sensor_op.clamped()),
            alpha_e=self.alpha_e,
            window_pi1=self.window_pi1,
            kappa_prime=self.kappa_prime,
        )
        log_h1, log_h0 = engine.human_log_terms(beta, gamma)
        self._log_h = (log_h1[None], log_h0[None])
        self.kappa_ = topo.n_humans / 2 if self.kappa is None else self.kappa
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = topo.n_sensors + topo.n_humans

    def fit(self, X, y=None):
        self._setup()
        self.reputations_ = np.ones(self.topology.n_sensors)
        self.identified_ = np.zeros(self.topology.n_sensors, dtype=bool)
        self.n_windows_seen_ = 0
        self.decisions_ = self._run(X, update=True)
        return self

    def partial_fit(self, X, y=None):
        if not hasattr(self, "reputations_"):
            return self.fit(X, y)
        self.decisions_ = self._run(X, update=True)
        return self

    def fit_predict(self, X, y=None):
        """FC decisions made while learning reputations window by window."""
        return self.fit(X, y).decisions_

    def predict(self, X):
        check_is_fitted(self, "reputations_")
        return self._run(X, update=False)

    def human_decisions(self, X):
        """Per-step human decisions ``d``, shape ``(n_windows, T, M)``, without updating reputations."""
        check_is_fitted(self, "reputations_")
        return np.stack([self._window(w)[0].decisions[0] for w in self._check(X)])

    def _check(self, X):
        return check_windows(X, self.topology.n_sensors, self.topology.n_humans)

    def _window(self, window):
        n = self.topology.n_sensors
        out = engine.belief_window(
            window[None, :, n:],
            window[None, :, :n],
            self.topology.neighbors[None],
            self.identified_[None],
            *self._log_h,
            self.params_,
        )
        fc = int(out.decisions[0, -1].sum() >= self.kappa_)
        return out, fc

    def _run(self, X, update):
        X = self._check(X)
        decisions = np.empty(len(X), dtype=int)
        for j, window in enumerate(X):
            out, decisions[j] = self._window(window)
            if update:
                reps, ident = self.reputations_[None], self.identified_[None]
                engine.reputation_step(
                    out.beliefs, self.topology.neighbors[None], reps, ident,
                    self.delta_step, self.eta, self.reputation_rule,
                )
                self.reputations_, self.identified_ = reps[0], ident[0]
                self.n_windows_seen_ += 1
        return decisions
