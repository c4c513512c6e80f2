"""Experiment configuration: defaults, validation, YAML round-trip and hashing."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

import yaml

from .model import HumanThresholdDist, ModelError, SignalModel
from .topology import TOPOLOGY_KINDS, TopologyError, resolve_degrees

SWEEP_AXES = (
    "alpha",
    "alpha_e",
    "beta_side",
    "gamma_side",
    "mu1",
    "tau",
    "delta_step",
    "eta",
    "kappa_prime",
    "T",
)
SIDE_AXES = ("beta_side", "gamma_side")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    N: int = 60
    M: int = 20
    T: int = 10
    alpha: float = 0.1
    alpha_e: float | None = None
    delta_step: float = 0.03
    eta: float = 0.2
    kappa: float | None = None
    kappa_prime: float = 1.0
    mu0: float = 0.0
    mu1: float = 4.0
    var0: float = 2.0
    var1: float = 2.0
    mu_tau: float = 2.0
    sigma_tau: float = 2.0
    tau: float = 2.0
    window_prior: float = 0.5
    hypothesis_prior: float = 0.5
    topology: str = "partition"
    k_h: int | None = None
    k_s: int | None = None
    trials: int = 20
    windows: int = 50
    seed: int = 0
    reputation_rule: str = "sign"
    threshold_redraw: str = "window"
    baseline_human_bits: str = "raw"
    allow_quadrature: bool = False
    beta_side: float = 0.9
    gamma_side: float = 0.1
    side_draws: int = 100_000
    batch_size: int = 64
    sweep_axis: str | None = None
    sweep_values: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for name in ("N", "M", "T", "trials", "windows", "side_draws", "batch_size"):
            _check(name, isinstance(getattr(self, name), int) and getattr(self, name) >= 1, "an integer >= 1")
        _check("seed", isinstance(self.seed, int) and self.seed >= 0, "a non-negative integer")
        _check("alpha", 0.0 <= self.alpha <= 1.0, "in [0, 1]")
        if self.alpha_e is not None:
            _check("alpha_e", 0.0 < self.alpha_e < 1.0, "in (0, 1)")
        else:
            _check("alpha", 0.0 < self.alpha < 1.0, "in (0, 1) unless alpha_e is set")
        _check("delta_step", self.delta_step > 0, "positive")
        _check("kappa_prime", self.kappa_prime > 0, "positive")
        _check("tau", self.tau > 0, "positive")
        _check("window_prior", 0.0 < self.window_prior < 1.0, "in (0, 1)")
        _check("hypothesis_prior", 0.0 <= self.hypothesis_prior <= 1.0, "in [0, 1]")
        _check("beta_side", 0.0 <= self.beta_side <= 1.0, "in [0, 1]")
        _check("gamma_side", 0.0 <= self.gamma_side <= 1.0, "in [0, 1]")
        _check("topology", self.topology in TOPOLOGY_KINDS, f"one of {TOPOLOGY_KINDS}")
        _check("reputation_rule", self.reputation_rule in ("sign", "count"), "'sign' or 'count'")
        _check("threshold_redraw", self.threshold_redraw in ("window", "trial"), "'window' or 'trial'")
        _check("baseline_human_bits", self.baseline_human_bits in ("raw", "belief"), "'raw' or 'belief'")
        if self.sweep_axis is not None:
            _check("sweep_axis", self.sweep_axis in SWEEP_AXES, f"one of {SWEEP_AXES}")
        try:
            self.signal_model()
        except ModelError as exc:
            raise ConfigError(f"mu0/mu1/var0/var1: {exc}") from None
        if not self.signal_model().monotone and not self.allow_quadrature:
            raise ConfigError("var0/var1: non-monotone LR model requires allow_quadrature: true")
        _check("sigma_tau", self.sigma_tau > 0, "positive")
        try:
            self.degrees()
        except TopologyError as exc:
            raise ConfigError(f"topology: {exc}") from None

    @property
    def effective_alpha_e(self) -> float:
        return self.alpha if self.alpha_e is None else self.alpha_e

    @property
    def effective_kappa(self) -> float:
        return self.M / 2 if self.kappa is None else self.kappa

    def signal_model(self) -> SignalModel:
        return SignalModel(self.mu0, self.mu1, self.var0, self.var1)

    def threshold_dist(self) -> HumanThresholdDist:
        return HumanThresholdDist(self.mu_tau, self.sigma_tau)

    def degrees(self) -> tuple[int, int]:
        return resolve_degrees(self.topology, self.N, self.M, self.k_h, self.k_s)

    def replace(self, **changes) -> "ExperimentConfig":
        return from_mapping({**to_mapping(self), **changes})

    def config_hash(self) -> str:
        return config_hash(self)


def _check(name: str, ok: bool, expectation: str):
    if not ok:
        raise ConfigError(f"{name}: must be {expectation}")


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_FLOAT_FIELDS = {
    name for name, f in _FIELDS.items() if f.type in ("float", "float | None")
}
_INT_FIELDS = {name for name, f in _FIELDS.items() if f.type in ("int", "int | None")}


def _coerce(name: str, value):
    if name in _FLOAT_FIELDS and value is not None:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: must be a number, got {value!r}")
        return float(value)
    if name in _INT_FIELDS and value is not None and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"{name}: must be an integer, got {value!r}")
    if name == "sweep_values":
        if value is None:
            return ()
        if not isinstance(value, (list, tuple)):
            value = [value]
        return tuple(value)
    return value


def from_mapping(data: Mapping[str, Any] | None) -> ExperimentConfig:
    data = dict(data or {})
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown configuration key")
    try:
        return ExperimentConfig(**{k: _coerce(k, v) for k, v in data.items()})
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def to_mapping(config: ExperimentConfig) -> dict[str, Any]:
    out = dataclasses.asdict(config)
    out["sweep_values"] = list(config.sweep_values)
    return out


def emit(config: ExperimentConfig) -> str:
    return yaml.safe_dump(to_mapping(config), sort_keys=True)


def config_hash(config: ExperimentConfig) -> str:
    canon = json.dumps(to_mapping(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def parse_override(item: str) -> tuple[str, Any]:
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"{item}: override must look like key=value")
    return key.strip(), yaml.safe_load(raw) if raw.strip() else None


def parse_config(path: str | Path | None = None, overrides=(), **extra) -> ExperimentConfig:
    """Load a YAML/JSON mapping (or nothing), apply ``key=value`` overrides, validate."""
    data: dict[str, Any] = {}
    if path is not None:
        text = Path(path).read_text()
        loaded = yaml.safe_load(text) if text.strip() else {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: expected a key/value mapping at top level")
        data.update(loaded)
    for item in overrides:
        key, value = parse_override(item) if isinstance(item, str) else item
        data[key] = value
    data.update({k: v for k, v in extra.items() if v is not None})
    return from_mapping(data)
