"""Experiment configuration: flat ``key = value`` text files.

Grids accept three spellings: a single number, a comma list (``0,0.5,0.9``)
or ``start:stop:count`` for an evenly spaced grid.  Unknown keys are
rejected by name.  Command-line ``key=value`` overrides take precedence
over file values.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields

import numpy as np

__all__ = ["ConfigError", "SimulationConfig", "parse_config", "apply_overrides"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def _parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        start, stop, count = text.split(":")
        return tuple(float(v) for v in np.linspace(float(start), float(stop), int(count)))
    if "," in text:
        return tuple(float(v) for v in text.split(","))
    return (float(text),)


def _parse_optional_float(text: str):
    return None if text.strip().lower() in ("none", "auto") else float(text)


def _parse_optional_grid(text: str):
    return None if text.strip().lower() == "none" else _parse_grid(text)


_PARSERS = {
    "config_id": str,
    "n_agents": int,
    "t_steps": int,
    "s_reps": int,
    "scenario": str,
    "theta": int,
    "mu0": float,
    "mu1": float,
    "sigma2": float,
    "rho_grid": _parse_grid,
    "bias": _parse_optional_float,
    "informed_prob_grid": _parse_optional_grid,
    "mu0_informed": float,
    "mu1_informed": float,
    "n_informed": int,
    "cost": float,
    "cost_informed": float,
    "t_c": int,
    "q_prime": float,
    "beta": float,
    "n_networks": int,
    "er_density": _parse_optional_float,
    "bias_grid": _parse_grid,
}


@dataclass(frozen=True)
class SimulationConfig:
    """Resolved experiment parameters.

    The mu0/mu1/cost fields describe the baseline (uninformed) agent class;
    the *_informed fields the informed class used by heterogeneous and
    endogenous experiments.
    """

    config_id: str = "custom"
    n_agents: int = 100
    t_steps: int = 100
    s_reps: int = 1000
    scenario: str = "equal"
    theta: int = 0
    mu0: float = 0.4
    mu1: float = 0.6
    sigma2: float = 0.1
    rho_grid: tuple[float, ...] = tuple(float(v) for v in np.linspace(0.0, 0.95, 20))
    bias: float | None = None
    informed_prob_grid: tuple[float, ...] | None = None
    mu0_informed: float = 0.3
    mu1_informed: float = 0.7
    n_informed: int = 4
    cost: float = 0.1
    cost_informed: float = 0.0
    t_c: int = 400
    q_prime: float = 0.5
    beta: float = 30.0
    n_networks: int = 1000
    er_density: float | None = None
    bias_grid: tuple[float, ...] = tuple(float(v) for v in np.linspace(0.0, 1.0, 11))

    def __post_init__(self):
        for key in ("n_agents", "t_steps", "s_reps", "t_c", "n_networks"):
            if getattr(self, key) < 0 or (key != "t_steps" and getattr(self, key) == 0):
                raise ConfigError(f"{key} must be positive")
        if self.scenario not in ("equal", "neighborhood_size", "relative_neighborhood"):
            raise ConfigError(f"scenario must name a weighting scenario, got {self.scenario!r}")
        if self.theta not in (0, 1):
            raise ConfigError("theta must be 0 or 1")
        if self.sigma2 <= 0:
            raise ConfigError("sigma2 must be positive")
        for rho in self.rho_grid:
            if not 0.0 <= rho <= 1.0:
                raise ConfigError(f"rho_grid values must lie in [0, 1], got {rho}")
        if self.bias is not None and not 0.0 <= self.bias <= 1.0:
            raise ConfigError("bias must lie in [0, 1]")
        for b in self.bias_grid:
            if not 0.0 <= b <= 1.0:
                raise ConfigError(f"bias_grid values must lie in [0, 1], got {b}")
        if not 0.0 <= self.q_prime <= 1.0:
            raise ConfigError("q_prime must lie in [0, 1]")
        if self.informed_prob_grid is not None and len(self.rho_grid) != 1:
            raise ConfigError(
                "informed_prob_grid sweeps require a single-value rho_grid"
            )
        if self.n_informed > self.n_agents:
            raise ConfigError("n_informed cannot exceed n_agents")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def canonical_text(self) -> str:
        """Stable serialization used for hashing and manifests."""
        lines = []
        for f in sorted(fld.name for fld in fields(self)):
            value = getattr(self, f)
            if value is None:
                txt = "none"
            elif isinstance(value, tuple):
                txt = ",".join(repr(v) for v in value)
            elif isinstance(value, float):
                txt = repr(value)
            else:
                txt = str(value)
            lines.append(f"{f} = {txt}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha1(self.canonical_text().encode()).hexdigest()[:8]

    def label(self, prefix: str | None = None) -> str:
        """Value for the runs.csv config column: ``<id>#<hash8>``."""
        head = prefix if prefix is not None else self.config_id
        return f"{head}#{self.config_hash()}"


def _parse_pairs(lines, source: str) -> dict:
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown config key: {key!r}")
        try:
            values[key] = _PARSERS[key](text.strip())
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def parse_config(text: str, source: str = "<config>") -> SimulationConfig:
    return SimulationConfig(**_parse_pairs(text.splitlines(), source))


def apply_overrides(cfg: SimulationConfig, overrides: list[str]) -> SimulationConfig:
    """Apply ``key=value`` strings on top of an existing configuration."""
    merged = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    merged.update(_parse_pairs(overrides, "<override>"))
    return SimulationConfig(**merged)


def load_config(path) -> SimulationConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))
