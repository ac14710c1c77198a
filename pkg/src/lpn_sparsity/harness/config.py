"""Experiment configuration: one flat record, YAML on disk, canonical JSON for hashing."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import typing
from dataclasses import dataclass, fields

import yaml

from ..field import make_field
from ..linmodel import GammaSpec

RELEVANCE = ("psi", "distinguisher")
COEFFICIENTS = ("psi", "gauss")
METHODS = ("sparse", "full")
APPROXIMATORS = ("cheat", "brute-force")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    # field and target
    q: int = 2
    n: int = 16
    d: int = 3
    # approximation band, e.g. "affine:2", "power:1.5", "table:1,2;4,9"
    gamma: str = "affine:2"
    approximator: str = "cheat"
    approx_mode: str = "exact"
    approx_delta: float | None = None
    clamp: bool = False
    # noise
    eta: float = 0.1
    eta_bound: float = 0.1
    sweep: bool = False
    grid_steps: int = 50
    # method
    method: str = "sparse"
    relevance: str = "psi"
    coefficients: str = "gauss"
    fast: bool = True
    m: int | None = None
    k: int | None = None
    h: float | None = None
    distinguisher_trials: int = 25
    # budgets
    delta: float = 0.1
    boost_reps: int | None = None
    example_cap: int | None = None
    wall_cap_s: float | None = None
    # seeds
    seed: int = 0
    seed_label: str = "trial"
    # instances
    examples: int = 5000
    challenge: bool = False
    # paths
    instance: str | None = None
    sealed: str | None = None
    psi_table: str | None = None
    output: str | None = None
    pool_dump: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            ctx = make_field(self.q)
        except ValueError as e:
            raise ConfigError(f"q: {e}") from None
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if not 0 <= self.d <= self.n:
            raise ConfigError(f"d must be in [0, n={self.n}]")
        if not 0 <= self.eta <= self.eta_bound < 1 - 1 / ctx.q:
            raise ConfigError(f"need 0 <= eta <= eta_bound < {1 - 1 / ctx.q:.4g}")
        for name, allowed in (("relevance", RELEVANCE), ("coefficients", COEFFICIENTS),
                              ("method", METHODS), ("approximator", APPROXIMATORS)):
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must be in (0, 1)")
        if self.grid_steps < 1 or self.examples < 0 or self.distinguisher_trials < 1:
            raise ConfigError("grid_steps and distinguisher_trials must be >= 1, examples >= 0")
        try:
            self.gamma_spec()
        except ValueError as e:
            raise ConfigError(f"gamma: {e}") from None

    def gamma_spec(self) -> GammaSpec:
        return GammaSpec.parse(self.gamma)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def canonical(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        hints = typing.get_type_hints(cls)
        return cls(**{k: coerce(k, hints[k], v) for k, v in doc.items()})

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        doc = yaml.safe_load(text) or {}
        if not isinstance(doc, dict):
            raise ConfigError("config file must be a mapping")
        return cls.from_dict(doc)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def base_type(tp):
    """(scalar type, optional?) for annotations like ``int | None``."""
    args = typing.get_args(tp)
    if args:
        inner = [a for a in args if a is not type(None)]
        return inner[0], len(inner) < len(args)
    return tp, False


def coerce(name: str, tp, value):
    t, optional = base_type(tp)
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{name} may not be null")
    if t is bool:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false", "1", "0", "yes", "no"):
            return value.lower() in ("true", "1", "yes")
        raise ConfigError(f"{name}: expected a boolean, got {value!r}")
    try:
        if t is int and isinstance(value, float) and not value.is_integer():
            raise ValueError
        return t(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected {t.__name__}, got {value!r}") from None
