"""Experiment configuration: a flat ``key = value`` text format.

One key per line, ``#`` starts a comment, unknown keys are rejected so a
typo cannot silently fall back to a default.  Coefficient-set parameters
are passed through with a ``coeff_`` prefix (``coeff_kappa = 0.4``).
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .coefficients import COEFFICIENT_NAMES, CoefficientSet, make_coefficients
from .errors import ConfigurationError
from .roughpath import MAX_FBM_FINE_POINTS, LiftSpec
from .solver import verify_h4
from .spectral import Generator

__all__ = ["ExperimentConfig", "load_config", "resolve_workers", "resolve_output_dir"]

_DRIVERS = ("brownian_ito", "brownian_strat", "fbm")


@dataclass
class ExperimentConfig:
    n_modes: int = 32
    eigenvalue_rule: str = "n^2"
    coefficients: str = "dissipative-ou"
    coeff_params: Dict[str, float] = field(default_factory=dict)
    gamma: float = 0.4
    eta: Optional[float] = None          # default: gamma - 0.1, clipped
    driver: str = "brownian_strat"
    hurst: float = 0.45
    grid_n: int = 4096
    fine_factor: int = 64
    horizon: float = 1.0
    epsilons: List[float] = field(default_factory=lambda: [1e-1, 3e-2, 1e-2, 3e-3])
    delta_rule: str = "schedule"         # "schedule" or comma list of values
    mc_samples: int = 64
    frozen_samples: int = 1024
    t_star: str = "auto"                 # "auto" or a positive float literal
    master_seed: int = 20240810
    output_dir: str = "out"
    drift_mode: str = "oracle"           # "oracle" | "mc"
    workers: int = 0                     # 0 = automatic
    x0_rule: str = "decay"               # "decay" | "zero" | comma list
    y0_rule: str = "zero"

    # -- derived objects ---------------------------------------------------
    def resolved_eta(self) -> float:
        if self.eta is not None:
            return self.eta
        lo, hi = self.gamma - 0.25, self.gamma
        return min(max(self.gamma - 0.1, lo + 1e-3), hi - 1e-3)

    def build_generator(self) -> Generator:
        return Generator.from_rule(self.eigenvalue_rule, self.n_modes)

    def build_coefficients(self, gen: Generator) -> CoefficientSet:
        return make_coefficients(self.coefficients, gen, **self.coeff_params)

    def _state_from_rule(self, rule: str) -> np.ndarray:
        rule = rule.strip()
        if rule == "zero":
            return np.zeros(self.n_modes)
        if rule == "decay":
            return 0.5 * np.exp(-np.arange(self.n_modes) / 3.0)
        vals = np.array([float(tok) for tok in rule.split(",")])
        if vals.size != self.n_modes:
            raise ConfigurationError(
                f"state list has {vals.size} entries, expected {self.n_modes}")
        return vals

    def initial_slow(self) -> np.ndarray:
        return self._state_from_rule(self.x0_rule)

    def initial_fast(self) -> np.ndarray:
        return self._state_from_rule(self.y0_rule)

    def slow_lift_spec(self) -> LiftSpec:
        hurst = self.hurst if self.driver == "fbm" else None
        return LiftSpec(kind=self.driver, hurst=hurst,
                        fine_factor=self.fine_factor, seed=self.master_seed)

    def fast_lift_spec(self) -> LiftSpec:
        return LiftSpec(kind="brownian_ito", fine_factor=self.fine_factor,
                        seed=self.master_seed)

    def resolved_t_star(self, c: CoefficientSet, gen: Generator) -> float:
        """Burn-in for drift ensembles; 'auto' derives it from the
        contraction margin so the initial condition decays below 1e-3."""
        if self.t_star != "auto":
            return float(self.t_star)
        rho = float(gen.eigenvalues[0]) - c.lip_f2 - c.lip_g2 ** 2
        return math.log(1e3) / rho * 1.05

    def deltas(self) -> Optional[List[float]]:
        """Explicit block lengths, or None when the schedule rule applies."""
        if self.delta_rule == "schedule":
            return None
        return [float(tok) for tok in self.delta_rule.split(",")]

    def validate(self) -> None:
        if not 1.0 / 3.0 < self.gamma <= 0.5:
            raise ConfigurationError("gamma must lie in (1/3, 1/2]")
        eta = self.resolved_eta()
        if not self.gamma - 0.25 < eta < self.gamma:
            raise ConfigurationError(
                f"eta = {eta} must lie in (gamma - 1/4, gamma) = "
                f"({self.gamma - 0.25}, {self.gamma})")
        for label, count in (("n_modes", self.n_modes), ("grid_n", self.grid_n),
                             ("fine_factor", self.fine_factor),
                             ("mc_samples", self.mc_samples),
                             ("frozen_samples", self.frozen_samples)):
            if count < 1:
                raise ConfigurationError(f"{label} must be >= 1")
        if self.horizon <= 0:
            raise ConfigurationError("horizon must be > 0")
        if self.driver not in _DRIVERS:
            raise ConfigurationError(f"driver must be one of {_DRIVERS}")
        if self.driver == "fbm":
            if not 1.0 / 3.0 < self.hurst <= 0.5:
                raise ConfigurationError("hurst must lie in (1/3, 1/2]")
            if self.grid_n * self.fine_factor > MAX_FBM_FINE_POINTS:
                raise ConfigurationError(
                    f"fbm driver needs grid_n * fine_factor <= {MAX_FBM_FINE_POINTS}")
        if not self.epsilons or any(not 0.0 < e <= 1.0 for e in self.epsilons):
            raise ConfigurationError("epsilons must lie in (0, 1]")
        if self.drift_mode not in ("oracle", "mc"):
            raise ConfigurationError("drift_mode must be 'oracle' or 'mc'")
        if self.t_star != "auto":
            try:
                if float(self.t_star) <= 0:
                    raise ValueError
            except ValueError:
                raise ConfigurationError("t_star must be 'auto' or a positive number") \
                    from None
        deltas = self.deltas()
        if deltas is not None:
            step = self.horizon / self.grid_n
            for dv in deltas:
                if dv <= 0 or abs(dv / step - round(dv / step)) > 1e-9:
                    raise ConfigurationError(
                        f"delta = {dv} is not a positive multiple of the step {step}")
            if len(deltas) != len(self.epsilons):
                raise ConfigurationError("need one delta per epsilon")
        if self.coefficients not in COEFFICIENT_NAMES:
            raise ConfigurationError(
                f"unknown coefficient set {self.coefficients!r}")
        gen = self.build_generator()
        c = self.build_coefficients(gen)
        h4 = verify_h4(c, gen)
        if not h4.passed:
            raise ConfigurationError(
                f"coefficient set {c.name!r} fails the dissipativity condition "
                f"(margin {h4.margin:.6g})")
        self._state_from_rule(self.x0_rule)
        self._state_from_rule(self.y0_rule)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_INT_KEYS = {"n_modes", "grid_n", "fine_factor", "mc_samples", "frozen_samples",
             "master_seed", "workers"}
_FLOAT_KEYS = {"gamma", "eta", "hurst", "horizon"}
_RENAMED = {"eigenvalues": "eigenvalue_rule", "delta": "delta_rule",
            "x0": "x0_rule", "y0": "y0_rule"}


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate a flat key = value config file."""
    values: Dict[str, object] = {}
    coeff: Dict[str, float] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from None
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        key = _RENAMED.get(key, key)
        if key.startswith("coeff_"):
            try:
                coeff[key[len("coeff_"):]] = float(value)
            except ValueError:
                raise ConfigurationError(
                    f"{path}:{lineno}: coefficient parameters must be numbers") \
                    from None
            continue
        if key not in known or key == "coeff_params":
            raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key == "epsilons":
                values[key] = [float(tok) for tok in value.split(",")]
            else:
                values[key] = value
        except ValueError:
            raise ConfigurationError(f"{path}:{lineno}: bad value for {key!r}") from None
    cfg = ExperimentConfig(coeff_params=coeff, **values)
    cfg.validate()
    return cfg


def resolve_workers(cfg: ExperimentConfig) -> int:
    """Worker count: env override, then config, then the machine."""
    env = os.environ.get("ROUGHAVG_WORKERS")
    if env:
        return max(int(env), 1)
    if cfg.workers > 0:
        return cfg.workers
    return min(os.cpu_count() or 1, 8)


def resolve_output_dir(cfg: ExperimentConfig) -> str:
    return os.environ.get("ROUGHAVG_OUTPUT_DIR") or cfg.output_dir
