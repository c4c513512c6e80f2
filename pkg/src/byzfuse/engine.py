"""Vectorized belief windows and reputation updates over a batch of trials.

Array conventions (``B`` trials, ``T`` steps, ``M`` humans, ``N`` sensors,
``k`` sensors per human):

* ``b``: raw human decisions, bool ``(B, T, M)``
* ``u``: sensor reports as sent (after any flipping), bool ``(B, T, N)``
* ``neighbors``: sensor indices, int ``(B, M, k)``
* ``excluded``: sensors already identified as Byzantine, bool ``(B, N)``

The arithmetic mirrors :mod:`byzfuse.belief` step for step so the two
paths can be checked against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .belief import ConditionalReportRates, initial_belief
from .model import clamp_probability


@dataclass(frozen=True)
class BeliefParams:
    rates: ConditionalReportRates
    alpha_e: float
    window_pi1: float = 0.5
    kappa_prime: float = 1.0

    @property
    def w0(self) -> float:
        return initial_belief(self.alpha_e)

    @property
    def log_prior_odds(self) -> float:
        return math.log(self.window_pi1) - math.log1p(-self.window_pi1)


@dataclass
class BeliefOutcome:
    decisions: np.ndarray  # (B, T, M) bool, d at every step
    log_lambda: np.ndarray  # (B, M) at the last step
    beliefs: np.ndarray  # (B, M, k) at the last step


def human_log_terms(beta, gamma):
    """``(log beta/gamma, log (1-beta)/(1-gamma))`` with clamped probabilities."""
    beta = clamp_probability(np.asarray(beta, dtype=float))
    gamma = clamp_probability(np.asarray(gamma, dtype=float))
    return np.log(beta) - np.log(gamma), np.log1p(-beta) - np.log1p(-gamma)


def belief_window(b, u, neighbors, excluded, log_h1, log_h0, params: BeliefParams) -> BeliefOutcome:
    B, T, M = b.shape
    k = neighbors.shape[2]
    rates = params.rates
    log_kp = math.log(params.kappa_prime)
    batch = np.arange(B)[:, None, None]
    edge_excluded = excluded[batch, neighbors]

    decisions = np.empty((B, T, M), dtype=bool)
    beliefs = np.full((B, M, k), params.w0)

    log_lambda = params.log_prior_odds + np.where(b[:, 0], log_h1, log_h0)
    pi1 = expit(log_lambda)
    decisions[:, 0] = log_lambda >= log_kp

    for t in range(1, T):
        reports = u[:, t][batch, neighbors]
        pi0 = 1.0 - pi1
        q = (pi1 * rates.d_h + pi0 * rates.f_h)[:, :, None]
        r = (pi1 * rates.d_b + pi0 * rates.f_b)[:, :, None]

        delta1 = (rates.d_b + rates.d_h * beliefs) / (rates.f_b + rates.f_h * beliefs)
        delta0 = ((1.0 - rates.d_b) + (1.0 - rates.d_h) * beliefs) / (
            (1.0 - rates.f_b) + (1.0 - rates.f_h) * beliefs
        )
        log_delta = np.where(edge_excluded, 0.0, np.log(np.where(reports, delta1, delta0)))

        log_lambda = log_lambda + np.where(b[:, t], log_h1, log_h0)
        for j in range(k):
            log_lambda = log_lambda + log_delta[:, :, j]

        updated = np.where(reports, beliefs * (q / r), beliefs * ((1.0 - q) / (1.0 - r)))
        beliefs = np.where(edge_excluded, beliefs, updated)

        pi1 = expit(log_lambda)
        decisions[:, t] = log_lambda >= log_kp

    return BeliefOutcome(decisions, log_lambda, beliefs)


def reputation_increments(beliefs, neighbors, n_sensors, delta_step, rule="sign"):
    """Per-sensor reputation change from end-of-window beliefs, shape ``(B, N)``."""
    B = beliefs.shape[0]
    votes = np.where(beliefs > 1.0, 1.0, -1.0)
    flat = (np.arange(B)[:, None, None] * n_sensors + neighbors).ravel()
    degree = np.bincount(flat, minlength=B * n_sensors).reshape(B, n_sensors).astype(float)
    if rule == "sign":
        c = np.bincount(flat, weights=votes.ravel(), minlength=B * n_sensors).reshape(B, n_sensors)
        return np.where(c > 0, delta_step * c / degree, -delta_step * (1.0 - c / degree))
    if rule == "count":
        h = np.bincount(flat, weights=(votes > 0).ravel(), minlength=B * n_sensors).reshape(B, n_sensors)
        return np.where(h > degree / 2, delta_step * h / degree, -delta_step * (1.0 - h / degree))
    raise ValueError(f"unknown reputation rule {rule!r}")


def reputation_step(beliefs, neighbors, reputations, identified, delta_step, eta, rule="sign"):
    """Update reputations and the identified set in place."""
    reputations += reputation_increments(beliefs, neighbors, reputations.shape[1], delta_step, rule)
    identified |= reputations < eta
    return reputations, identified
