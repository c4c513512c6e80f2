"""Monte Carlo trials, windows and sweeps.

A trial is a fixed world (Byzantine identities, topology) run for
``config.windows`` windows; reputations persist across windows, beliefs and
priors are reset at the start of every window. Human thresholds are redrawn
every window unless ``threshold_redraw == "trial"``. Trial ``i``
draws everything from ``SeedSequence(config.seed, spawn_key=(i,))``, the
same stream ``SeedSequence(config.seed).spawn(n)[i]`` would give, so
results do not depend on how trials are batched or scheduled.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import baselines, engine
from .belief import report_rates
from .config import SIDE_AXES, SWEEP_AXES, ConfigError, ExperimentConfig
from .model import (
    OperatingPoint,
    averaged_human_roc,
    human_operating_points,
    lr_decisions,
    operating_point_for_lr_threshold,
)
from .sideinfo import Priors, SideInfoQuality, best_operation, error_probabilities
from .topology import build_topology

log = logging.getLogger(__name__)

Z95 = 1.959963984540054
SIDE_INFO_STREAM = 2**32 - 1


@dataclass(frozen=True)
class Context:
    """Quantities derived once per configuration."""

    config: ExperimentConfig
    sensor_op: OperatingPoint
    human_avg: OperatingPoint
    params: engine.BeliefParams

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "Context":
        model = cfg.signal_model()
        sensor_op = operating_point_for_lr_threshold(cfg.tau, model, cfg.allow_quadrature)
        human_avg = averaged_human_roc(cfg.threshold_dist(), model, cfg.allow_quadrature)
        params = engine.BeliefParams(
            rates=report_rates(sensor_op.clamped()),
            alpha_e=cfg.effective_alpha_e,
            window_pi1=cfg.window_prior,
            kappa_prime=cfg.kappa_prime,
        )
        return cls(cfg, sensor_op, human_avg, params)


@dataclass
class World:
    """State of a batch of independent trials."""

    rngs: list
    neighbors: np.ndarray  # (B, M, k)
    byzantine: np.ndarray  # (B, N) bool
    xi: np.ndarray  # (B, M)
    log_h1: np.ndarray
    log_h0: np.ndarray
    reputations: np.ndarray  # (B, N)
    identified: np.ndarray  # (B, N) bool

    @property
    def size(self) -> int:
        return len(self.rngs)


@dataclass
class WindowRecord:
    hypothesis: np.ndarray  # (B,) bool
    fc: np.ndarray
    cv: np.ndarray
    mr: np.ndarray
    mrh: np.ndarray
    human_correct: np.ndarray  # (B, T) number of humans with d == hypothesis
    identified_byzantine: np.ndarray  # (B,) after this window's reputation update
    identified_honest: np.ndarray
    n_byzantine: np.ndarray


def trial_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(index,))


def init_world(ctx: Context, trial_indices) -> World:
    cfg = ctx.config
    dist = cfg.threshold_dist()
    k_h, k_s = cfg.degrees()
    n_byz = int(round(cfg.alpha * cfg.N))
    rngs, neighbors, byz, xi = [], [], [], []
    for i in trial_indices:
        rng = np.random.default_rng(trial_seed(cfg.seed, int(i)))
        flags = np.zeros(cfg.N, dtype=bool)
        flags[rng.choice(cfg.N, size=n_byz, replace=False)] = True
        topo = build_topology(cfg.topology, cfg.N, cfg.M, rng, k_h=k_h, k_s=k_s)
        rngs.append(rng)
        byz.append(flags)
        neighbors.append(topo.neighbors)
        xi.append(dist.sample(cfg.M, rng))
    B = len(rngs)
    world = World(
        rngs=rngs,
        neighbors=np.array(neighbors),
        byzantine=np.array(byz),
        xi=np.array(xi),
        log_h1=None,
        log_h0=None,
        reputations=np.ones((B, cfg.N)),
        identified=np.zeros((B, cfg.N), dtype=bool),
    )
    return set_thresholds(world, world.xi, cfg)


def set_thresholds(world: World, xi, cfg: ExperimentConfig) -> World:
    world.xi = np.asarray(xi, dtype=float)
    beta, gamma = human_operating_points(world.xi, cfg.signal_model(), cfg.allow_quadrature)
    world.log_h1, world.log_h0 = engine.human_log_terms(beta, gamma)
    return world


def draw_window(ctx: Context, world: World):
    """Hypotheses and observations for one window of every trial in the batch."""
    cfg = ctx.config
    model = cfg.signal_model()
    redraw = cfg.threshold_redraw == "window"
    hyp = np.empty(world.size, dtype=bool)
    noise = np.empty((world.size, cfg.T, cfg.N + cfg.M))
    for j, rng in enumerate(world.rngs):
        if redraw:
            world.xi[j] = cfg.threshold_dist().sample(cfg.M, rng)
        hyp[j] = rng.random() < cfg.hypothesis_prior
        noise[j] = rng.standard_normal((cfg.T, cfg.N + cfg.M))
    if redraw:
        set_thresholds(world, world.xi, cfg)
    mu = np.where(hyp, model.mu1, model.mu0)[:, None, None]
    sd = np.sqrt(np.where(hyp, model.var1, model.var0))[:, None, None]
    obs = mu + sd * noise
    return hyp, obs[:, :, : cfg.N], obs[:, :, cfg.N :]


def run_window(ctx: Context, world: World, hypothesis=None, sensor_obs=None, human_obs=None) -> WindowRecord:
    """Run one window for every trial in ``world`` and update reputations.

    Observations are drawn from the trials' own streams unless given.
    """
    cfg = ctx.config
    model = cfg.signal_model()
    if hypothesis is None:
        hypothesis, sensor_obs, human_obs = draw_window(ctx, world)
    hypothesis = np.asarray(hypothesis, dtype=bool)

    v = lr_decisions(sensor_obs, cfg.tau, model)
    u = v ^ world.byzantine[:, None, :]
    b = lr_decisions(human_obs, world.xi[:, None, :], model)

    excluded = world.identified.copy()
    out = engine.belief_window(b, u, world.neighbors, excluded, world.log_h1, world.log_h0, ctx.params)
    fc = out.decisions[:, -1].sum(axis=1) >= cfg.effective_kappa

    sensor_bits = u[:, -1]
    human_bits = b[:, -1] if cfg.baseline_human_bits == "raw" else out.decisions[:, -1]
    cv = baselines.cv_statistic(
        sensor_bits, human_bits, cfg.effective_alpha_e, ctx.sensor_op, ctx.human_avg, cfg.hypothesis_prior
    ) >= 0.0
    n_all = cfg.N + cfg.M
    mr = sensor_bits.sum(axis=1) + human_bits.sum(axis=1) >= math.ceil(n_all / 2)
    mrh = human_bits.sum(axis=1) >= math.ceil(cfg.M / 2)

    engine.reputation_step(
        out.beliefs, world.neighbors, world.reputations, world.identified,
        cfg.delta_step, cfg.eta, cfg.reputation_rule,
    )
    correct = (out.decisions == hypothesis[:, None, None]).sum(axis=2)
    return WindowRecord(
        hypothesis=hypothesis,
        fc=fc,
        cv=cv,
        mr=mr,
        mrh=mrh,
        human_correct=correct,
        identified_byzantine=(world.identified & world.byzantine).sum(axis=1),
        identified_honest=(world.identified & ~world.byzantine).sum(axis=1),
        n_byzantine=world.byzantine.sum(axis=1),
    )


@dataclass
class TrialChunk:
    """Per-trial, per-window raw results; arrays are (trials, windows, ...)."""

    trial_indices: np.ndarray
    hypothesis: np.ndarray
    fc: np.ndarray
    cv: np.ndarray
    mr: np.ndarray
    mrh: np.ndarray
    human_correct: np.ndarray
    identified_byzantine: np.ndarray
    identified_honest: np.ndarray
    n_byzantine: np.ndarray

    @classmethod
    def concat(cls, chunks) -> "TrialChunk":
        chunks = sorted(chunks, key=lambda c: int(c.trial_indices[0]))
        return cls(**{f: np.concatenate([getattr(c, f) for c in chunks]) for f in cls.__dataclass_fields__})


def simulate_trials(cfg: ExperimentConfig, trial_indices) -> TrialChunk:
    ctx = Context.from_config(cfg)
    trial_indices = np.asarray(trial_indices)
    world = init_world(ctx, trial_indices)
    records = [run_window(ctx, world) for _ in range(cfg.windows)]
    stack = lambda name: np.stack([getattr(r, name) for r in records], axis=1)
    return TrialChunk(
        trial_indices=trial_indices,
        hypothesis=stack("hypothesis"),
        fc=stack("fc"),
        cv=stack("cv"),
        mr=stack("mr"),
        mrh=stack("mrh"),
        human_correct=stack("human_correct"),
        identified_byzantine=stack("identified_byzantine"),
        identified_honest=stack("identified_honest"),
        n_byzantine=world.byzantine.sum(axis=1),
    )


@dataclass
class Rate:
    value: float
    lo: float
    hi: float


def wilson(successes: int, n: int) -> Rate:
    p = successes / n
    denom = 1 + Z95**2 / n
    centre = (p + Z95**2 / (2 * n)) / denom
    half = Z95 * math.sqrt(p * (1 - p) / n + Z95**2 / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return Rate(p, lo, hi)


def mean_ci(samples) -> Rate:
    samples = np.asarray(samples, dtype=float)
    mean = float(samples.mean())
    if samples.size < 2:
        return Rate(mean, mean, mean)
    half = Z95 * float(samples.std(ddof=1)) / math.sqrt(samples.size)
    return Rate(mean, mean - half, mean + half)


@dataclass
class TrialMetrics:
    n_trials: int
    n_windows: int
    fc_error: Rate
    cv_error: Rate
    mr_error: Rate
    mrh_error: Rate
    frac_correct: list  # Rate per iteration, length T
    identified_ratio: Rate  # identified Byzantines / N at the final window
    unidentified_byzantine_ratio: Rate
    honest_ratio: Rate
    false_identification_rate: Rate  # identified honest / honest at the final window
    window_frac_correct: np.ndarray = field(repr=False, default=None)  # (n_windows, T)

    def to_row(self) -> dict:
        row = {"n_trials": self.n_trials, "n_windows": self.n_windows}
        named = {
            "proposed": self.fc_error,
            "cv": self.cv_error,
            "mr": self.mr_error,
            "mrh": self.mrh_error,
            "identified_ratio": self.identified_ratio,
            "unidentified_byzantine_ratio": self.unidentified_byzantine_ratio,
            "honest_ratio": self.honest_ratio,
            "false_identification_rate": self.false_identification_rate,
        }
        named.update({f"frac_correct_t{t + 1}": r for t, r in enumerate(self.frac_correct)})
        for name, rate in named.items():
            row[name] = rate.value
            row[f"{name}_ci_lo"] = rate.lo
            row[f"{name}_ci_hi"] = rate.hi
        return row


def aggregate(cfg: ExperimentConfig, data: TrialChunk) -> TrialMetrics:
    n = data.fc.size
    errors = {name: wilson(int((getattr(data, name) != data.hypothesis).sum()), n) for name in ("fc", "cv", "mr", "mrh")}
    frac = data.human_correct.reshape(n, cfg.T) / cfg.M
    n_honest = cfg.N - data.n_byzantine
    final_byz = data.identified_byzantine[:, -1]
    final_honest = data.identified_honest[:, -1]
    false_rate = np.where(n_honest > 0, final_honest / np.maximum(n_honest, 1), 0.0)
    return TrialMetrics(
        n_trials=data.fc.shape[0],
        n_windows=n,
        fc_error=errors["fc"],
        cv_error=errors["cv"],
        mr_error=errors["mr"],
        mrh_error=errors["mrh"],
        frac_correct=[mean_ci(frac[:, t]) for t in range(cfg.T)],
        identified_ratio=mean_ci(final_byz / cfg.N),
        unidentified_byzantine_ratio=mean_ci((data.n_byzantine - final_byz) / cfg.N),
        honest_ratio=mean_ci(n_honest / cfg.N),
        false_identification_rate=mean_ci(false_rate),
        window_frac_correct=frac,
    )


def worker_count(workers=None) -> int:
    if workers is None:
        workers = int(os.environ.get("BYZFUSE_THREADS", "0") or 0)
    return workers if workers > 0 else (os.cpu_count() or 1)


def run_trials(cfg: ExperimentConfig, workers=None) -> TrialChunk:
    chunks = [
        range(start, min(start + cfg.batch_size, cfg.trials)) for start in range(0, cfg.trials, cfg.batch_size)
    ]
    workers = min(worker_count(workers), len(chunks))
    log.debug("running %d trials in %d chunks on %d workers", cfg.trials, len(chunks), workers)
    if workers <= 1:
        results = [simulate_trials(cfg, list(c)) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(simulate_trials, [cfg] * len(chunks), [list(c) for c in chunks]))
    return TrialChunk.concat(results)


def run_experiment(cfg: ExperimentConfig, workers=None) -> TrialMetrics:
    return aggregate(cfg, run_trials(cfg, workers))


@dataclass
class SideInfoMetrics:
    beta_side: float
    gamma_side: float
    analytic: dict
    monte_carlo: dict  # operation -> Rate
    best_op: str
    n_draws: int

    def to_row(self) -> dict:
        row = {"beta_side": self.beta_side, "gamma_side": self.gamma_side, "n_draws": self.n_draws}
        for op in ("none", "or", "and"):
            row[f"pe_{op}"] = self.analytic[op]
            rate = self.monte_carlo[op]
            row[f"pe_{op}_mc"] = rate.value
            row[f"pe_{op}_mc_ci_lo"] = rate.lo
            row[f"pe_{op}_mc_ci_hi"] = rate.hi
        row["best_op"] = self.best_op
        return row


def simulate_side_info(cfg: ExperimentConfig, n_draws=None, rng=None) -> dict:
    """Monte Carlo error counts of raw, OR and AND decisions for freshly drawn humans."""
    n = cfg.side_draws if n_draws is None else n_draws
    rng = np.random.default_rng(trial_seed(cfg.seed, SIDE_INFO_STREAM)) if rng is None else rng
    model = cfg.signal_model()
    hyp = rng.random(n) < cfg.hypothesis_prior
    xi = cfg.threshold_dist().sample(n, rng)
    noise = rng.standard_normal(n)
    z = np.where(hyp, model.mu1 + math.sqrt(model.var1) * noise, model.mu0 + math.sqrt(model.var0) * noise)
    b = lr_decisions(z, xi, model)
    w = rng.random(n) < np.where(hyp, cfg.beta_side, cfg.gamma_side)
    decided = {"none": b, "or": b | w, "and": b & w}
    return {op: int((e != hyp).sum()) for op, e in decided.items()}


def side_info_metrics(cfg: ExperimentConfig, human_avg: OperatingPoint | None = None) -> SideInfoMetrics:
    if human_avg is None:
        human_avg = averaged_human_roc(cfg.threshold_dist(), cfg.signal_model(), cfg.allow_quadrature)
    q = SideInfoQuality(cfg.beta_side, cfg.gamma_side)
    priors = Priors.from_pi1(cfg.hypothesis_prior)
    counts = simulate_side_info(cfg)
    return SideInfoMetrics(
        beta_side=cfg.beta_side,
        gamma_side=cfg.gamma_side,
        analytic=error_probabilities(q, human_avg, priors),
        monte_carlo={op: wilson(c, cfg.side_draws) for op, c in counts.items()},
        best_op=best_operation(q, human_avg, priors),
        n_draws=cfg.side_draws,
    )


def sweep(cfg: ExperimentConfig, axis: str, values, workers=None) -> list[dict]:
    """One row per value of ``axis``; every row reuses the same master seed."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"{axis}: unknown sweep axis; expected one of {SWEEP_AXES}")
    rows = []
    for value in values:
        point = cfg.replace(**{axis: value})
        if axis in SIDE_AXES:
            metrics = side_info_metrics(point)
        else:
            metrics = run_experiment(point, workers)
        rows.append({axis: value, **metrics.to_row()})
    return rows
