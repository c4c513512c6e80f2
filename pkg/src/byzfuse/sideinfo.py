"""Binary side information fused into a human's raw decision by OR / AND.

Everything here is closed form in the population-averaged human operating
point ``(beta_bar, gamma_bar)`` and the side-information quality
``(beta_side, gamma_side)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array

from .model import ModelError, OperatingPoint

OPERATIONS = ("none", "or", "and")


@dataclass(frozen=True)
class SideInfoQuality:
    beta_side: float
    gamma_side: float

    def __post_init__(self):
        if not (0.0 <= self.beta_side <= 1.0 and 0.0 <= self.gamma_side <= 1.0):
            raise ModelError(f"side-information quality out of range: {self}")


@dataclass(frozen=True)
class Priors:
    pi0: float = 0.5
    pi1: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.pi0 <= 1.0 and 0.0 <= self.pi1 <= 1.0) or abs(self.pi0 + self.pi1 - 1.0) > 1e-12:
            raise ModelError(f"priors must be probabilities summing to one: {self}")

    @classmethod
    def from_pi1(cls, pi1: float) -> "Priors":
        return cls(pi0=1.0 - pi1, pi1=pi1)


def or_combine(b, w):
    return np.logical_or(b, w).astype(int) if np.ndim(b) or np.ndim(w) else int(bool(b) or bool(w))


def and_combine(b, w):
    return np.logical_and(b, w).astype(int) if np.ndim(b) or np.ndim(w) else int(bool(b) and bool(w))


def or_operating_point(q: SideInfoQuality, avg: OperatingPoint) -> OperatingPoint:
    return OperatingPoint(
        q.beta_side + (1.0 - q.beta_side) * avg.pd,
        q.gamma_side + (1.0 - q.gamma_side) * avg.pf,
    )


def and_operating_point(q: SideInfoQuality, avg: OperatingPoint) -> OperatingPoint:
    return OperatingPoint(q.beta_side * avg.pd, q.gamma_side * avg.pf)


def likelihoods_or(e: int, q: SideInfoQuality, avg: OperatingPoint) -> tuple[float, float]:
    """``(f(e|H1), f(e|H0))`` for the OR rule."""
    f1 = q.beta_side * e + (1.0 - q.beta_side) * (avg.pd**e * (1.0 - avg.pd) ** (1 - e))
    f0 = q.gamma_side * e + (1.0 - q.gamma_side) * (avg.pf**e * (1.0 - avg.pf) ** (1 - e))
    return f1, f0


def likelihoods_and(e: int, q: SideInfoQuality, avg: OperatingPoint) -> tuple[float, float]:
    """``(f(e|H1), f(e|H0))`` for the AND rule."""
    f1 = q.beta_side * avg.pd**e * (1.0 - avg.pd) ** (1 - e) + (1.0 - q.beta_side) * (1 - e)
    f0 = q.gamma_side * avg.pf**e * (1.0 - avg.pf) ** (1 - e) + (1.0 - q.gamma_side) * (1 - e)
    return f1, f0


def error_probability(op: OperatingPoint, priors: Priors) -> float:
    return priors.pi0 * op.pf + priors.pi1 * (1.0 - op.pd)


def error_probabilities(q: SideInfoQuality, avg: OperatingPoint, priors: Priors) -> dict[str, float]:
    """Error probability with no side information, with OR and with AND."""
    return {
        "none": error_probability(avg, priors),
        "or": error_probability(or_operating_point(q, avg), priors),
        "and": error_probability(and_operating_point(q, avg), priors),
    }


def best_operation(q: SideInfoQuality, avg: OperatingPoint, priors: Priors) -> str:
    pe = error_probabilities(q, avg, priors)
    return min(OPERATIONS, key=lambda k: (pe[k], OPERATIONS.index(k)))


# Theorem predicates, cross-multiplied so that the boundary cases of the
# ratio forms (zero denominators) need no special handling. Equality counts
# as "helps"; TIE_TOL absorbs rounding so that exact ties on decimal grids
# are not lost.
TIE_TOL = 1e-12


def theorem1_and_helps(q: SideInfoQuality, avg: OperatingPoint, priors: Priors) -> bool:
    """AND does not increase the error: ``beta_bar/gamma_bar <= pi0 (1-gs) / (pi1 (1-bs))``."""
    return avg.pd * priors.pi1 * (1.0 - q.beta_side) <= priors.pi0 * (1.0 - q.gamma_side) * avg.pf + TIE_TOL


def theorem1_or_helps(q: SideInfoQuality, avg: OperatingPoint, priors: Priors) -> bool:
    """OR does not increase the error: ``pi0 (1-gamma_bar) / (pi1 (1-beta_bar)) <= bs / gs``."""
    return priors.pi0 * (1.0 - avg.pf) * q.gamma_side <= q.beta_side * priors.pi1 * (1.0 - avg.pd) + TIE_TOL


def theorem1_or_beats_and(q: SideInfoQuality, avg: OperatingPoint, priors: Priors) -> bool:
    lhs = priors.pi0 * (1.0 - 2.0 * avg.pf) * q.gamma_side - priors.pi1 * (1.0 - 2.0 * avg.pd) * q.beta_side
    return lhs <= priors.pi1 * avg.pd - priors.pi0 * avg.pf + TIE_TOL


class SideInfoCombiner(TransformerMixin, BaseEstimator):
    """Combine raw human decisions with side-information bits.

    Parameters
    ----------
    operation : {"or", "and", "none"}, default="or"
        How the side bit is folded into the raw decision. ``"none"`` passes
        the raw decision through.

    ``transform`` takes ``X`` of shape (n_samples, 2) with columns
    ``(b, w)`` and returns the combined decision ``e`` of shape (n_samples,).
    """

    def __init__(self, operation="or"):
        self.operation = operation

    def fit(self, X=None, y=None):
        if self.operation not in OPERATIONS:
            raise ValueError(f"operation must be one of {OPERATIONS}, got {self.operation!r}")
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        X = _check_bits(X, n_features=2)
        b, w = X[:, 0], X[:, 1]
        if self.operation == "or":
            return or_combine(b, w)
        if self.operation == "and":
            return and_combine(b, w)
        return b.astype(int)


def _check_bits(X, n_features=None):
    X = check_array(X, dtype=np.int64)
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} columns, got {X.shape[1]}")
    if not np.isin(X, (0, 1)).all():
        raise ValueError("decision arrays must contain only 0/1")
    return X
