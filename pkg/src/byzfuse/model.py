"""Gaussian signal model, likelihood ratios and operating points.

Physical sensors threshold the likelihood ratio of their observation at a
fixed value ``tau``. Human agents threshold the same statistic at a random
threshold ``xi`` drawn from a Gaussian; a non-positive ``xi`` always accepts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

# Probabilities entering likelihood ratios are kept away from {0, 1}.
PROB_EPS = 1e-12


class ModelError(ValueError):
    pass


class QuadratureError(RuntimeError):
    def __init__(self, message: str, error_bound: float):
        super().__init__(f"{message} (achieved error bound {error_bound:.3e})")
        self.error_bound = error_bound


@dataclass(frozen=True)
class SignalModel:
    """Conditional Gaussian observation model ``y | H_h ~ N(mu_h, var_h)``."""

    mu0: float = 0.0
    mu1: float = 4.0
    var0: float = 2.0
    var1: float = 2.0

    def __post_init__(self):
        if not (self.var0 > 0 and self.var1 > 0):
            raise ModelError("variances must be positive")
        if self.mu1 == self.mu0:
            raise ModelError("mu1 must differ from mu0")

    @property
    def equal_variance(self) -> bool:
        return self.var0 == self.var1

    @property
    def monotone(self) -> bool:
        """True when the LR is increasing in the observation."""
        return self.equal_variance and self.mu1 > self.mu0

    def sample(self, hypothesis, size, rng: np.random.Generator) -> np.ndarray:
        mu = self.mu1 if hypothesis else self.mu0
        var = self.var1 if hypothesis else self.var0
        return mu + math.sqrt(var) * rng.standard_normal(size)


@dataclass(frozen=True)
class OperatingPoint:
    pd: float
    pf: float

    def __post_init__(self):
        if not (0.0 <= self.pd <= 1.0 and 0.0 <= self.pf <= 1.0):
            raise ModelError(f"operating point out of range: {self}")

    def clamped(self, eps: float = PROB_EPS) -> "OperatingPoint":
        return OperatingPoint(clamp_probability(self.pd, eps), clamp_probability(self.pf, eps))


@dataclass(frozen=True)
class HumanThresholdDist:
    """Gaussian law of human LR thresholds; ``sigma_tau`` is a standard deviation."""

    mu_tau: float = 2.0
    sigma_tau: float = 2.0

    def __post_init__(self):
        if not self.sigma_tau > 0:
            raise ModelError("sigma_tau must be positive")

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        return self.mu_tau + self.sigma_tau * rng.standard_normal(size)


def clamp_probability(p, eps: float = PROB_EPS):
    return np.clip(p, eps, 1.0 - eps) if isinstance(p, np.ndarray) else min(max(p, eps), 1.0 - eps)


def log_likelihood_ratio(y, model: SignalModel):
    """``log f(y|H1) - log f(y|H0)``; accepts scalars or arrays."""
    y = np.asarray(y, dtype=float)
    out = (
        -0.5 * (y - model.mu1) ** 2 / model.var1
        + 0.5 * (y - model.mu0) ** 2 / model.var0
        - 0.5 * math.log(model.var1 / model.var0)
    )
    return out if out.ndim else float(out)


def likelihood_ratio(y, model: SignalModel):
    return np.exp(log_likelihood_ratio(y, model))


def sensor_decide(y: float, tau: float, model: SignalModel) -> int:
    if not tau > 0:
        raise ModelError("sensor threshold tau must be positive")
    return int(likelihood_ratio(y, model) >= tau)


def human_decide_raw(z: float, xi: float, model: SignalModel) -> int:
    if xi <= 0:
        return 1
    return int(likelihood_ratio(z, model) >= xi)


def lr_decisions(obs: np.ndarray, thresholds, model: SignalModel) -> np.ndarray:
    """Vectorized ``LR(obs) >= threshold`` with non-positive thresholds accepting."""
    thresholds = np.asarray(thresholds, dtype=float)
    llr = log_likelihood_ratio(obs, model)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_thr = np.where(thresholds > 0, np.log(np.where(thresholds > 0, thresholds, 1.0)), -np.inf)
    return llr >= log_thr


def observation_threshold(tau: float, model: SignalModel) -> float:
    """Observation value at which a monotone LR equals ``tau``."""
    if not model.monotone:
        raise ModelError("LR is not monotone in the observation for this model")
    mid = 0.5 * (model.mu0 + model.mu1)
    return mid + model.var0 * math.log(tau) / (model.mu1 - model.mu0)


def _acceptance_intervals(tau: float, model: SignalModel) -> list[tuple[float, float]]:
    # log LR is quadratic in y: a y^2 + b y + c >= log(tau)
    a = 0.5 / model.var0 - 0.5 / model.var1
    b = model.mu1 / model.var1 - model.mu0 / model.var0
    c = (
        0.5 * model.mu0**2 / model.var0
        - 0.5 * model.mu1**2 / model.var1
        - 0.5 * math.log(model.var1 / model.var0)
        - math.log(tau)
    )
    if a == 0.0:
        root = -c / b
        return [(root, math.inf)] if b > 0 else [(-math.inf, root)]
    disc = b * b - 4 * a * c
    if disc <= 0:
        return [(-math.inf, math.inf)] if a > 0 else []
    r1, r2 = sorted(((-b - math.sqrt(disc)) / (2 * a), (-b + math.sqrt(disc)) / (2 * a)))
    if a > 0:
        return [(-math.inf, r1), (r2, math.inf)]
    return [(r1, r2)]


def _quadrature_operating_point(tau: float, model: SignalModel) -> OperatingPoint:
    probs = []
    for mu, var in ((model.mu1, model.var1), (model.mu0, model.var0)):
        dist = stats.norm(mu, math.sqrt(var))
        total = 0.0
        for lo, hi in _acceptance_intervals(tau, model):
            val, err = integrate.quad(dist.pdf, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
            if err > 1e-9:
                raise QuadratureError("operating-point quadrature did not converge", err)
            total += val
        probs.append(min(max(total, 0.0), 1.0))
    return OperatingPoint(*probs)


def operating_point_for_lr_threshold(
    tau: float, model: SignalModel, allow_quadrature: bool = False
) -> OperatingPoint:
    """Return ``(P(LR >= tau | H1), P(LR >= tau | H0))``.

    Closed form on monotone models. Other models need ``allow_quadrature``.
    """
    if not tau > 0:
        raise ModelError("LR threshold must be positive")
    if not model.monotone:
        if not allow_quadrature:
            raise ModelError(
                "LR is non-monotone for this model; enable allow_quadrature to integrate numerically"
            )
        return _quadrature_operating_point(tau, model)
    y_star = observation_threshold(tau, model)
    pd = special.ndtr((model.mu1 - y_star) / math.sqrt(model.var1))
    pf = special.ndtr((model.mu0 - y_star) / math.sqrt(model.var0))
    return OperatingPoint(float(pd), float(pf))


def human_operating_points(xi: np.ndarray, model: SignalModel, allow_quadrature: bool = False):
    """Per-human ``(beta, gamma)`` arrays for thresholds ``xi``; ``xi <= 0`` maps to (1, 1)."""
    xi = np.asarray(xi, dtype=float)
    beta = np.ones_like(xi)
    gamma = np.ones_like(xi)
    pos = xi > 0
    if model.monotone:
        y_star = model.mu0 + 0.5 * (model.mu1 - model.mu0) + model.var0 * np.log(xi[pos]) / (
            model.mu1 - model.mu0
        )
        beta[pos] = special.ndtr((model.mu1 - y_star) / math.sqrt(model.var1))
        gamma[pos] = special.ndtr((model.mu0 - y_star) / math.sqrt(model.var0))
    else:
        for idx in np.flatnonzero(pos):
            op = operating_point_for_lr_threshold(xi.flat[idx], model, allow_quadrature)
            beta.flat[idx], gamma.flat[idx] = op.pd, op.pf
    return beta, gamma


def averaged_human_roc(
    dist: HumanThresholdDist, model: SignalModel, allow_quadrature: bool = False
) -> OperatingPoint:
    """Population-averaged human ``(beta_bar, gamma_bar)``.

    Integrates the per-threshold operating point against the threshold
    density in standardized coordinates; the mass at ``xi <= 0`` accepts
    with probability one.
    """
    lower = -dist.mu_tau / dist.sigma_tau
    auto_accept = float(special.ndtr(lower))
    # standard normal mass outside [-40, 40] is below double precision
    lo, hi = max(lower, -40.0), 40.0
    if lo >= hi:
        return OperatingPoint(auto_accept, auto_accept)
    result = []
    for which in (0, 1):

        def integrand(x, which=which):
            op = operating_point_for_lr_threshold(dist.mu_tau + dist.sigma_tau * x, model, allow_quadrature)
            return stats.norm.pdf(x) * (op.pd, op.pf)[which]

        val, err = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
        if err > 1e-9:
            raise QuadratureError("averaged human ROC quadrature did not converge", err)
        result.append(min(auto_accept + val, 1.0))
    return OperatingPoint(*result)
