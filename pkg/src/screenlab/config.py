"""Run configuration: line-oriented `section.key = value` files.

An empty file reproduces the headline figure setup: normal noise, uniform
types on [5, 15], v(theta) = theta - 11, and a 60-point log grid from 0.8 to
100 times the existence threshold.  `#` starts a comment; unknown keys and
malformed values are reported with their line number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Optional

from .environment import Environment
from .equilibrium import ScreeningGame
from .noise import NoiseModel, make_noise


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    noise_family: str = "normal"
    theta_low: float = 5.0
    theta_high: float = 15.0
    v_kappa: float = 11.0
    g_family: str = "uniform"
    grid_min_mult: float = 0.8
    grid_max_mult: float = 100.0
    grid_points: int = 60
    grid_spacing: str = "log"
    quad_tol: float = 1e-10
    solver_tol: float = 1e-10
    seed: int = 42
    mc_n: int = 1_000_000
    out_csv: Optional[str] = None
    out_svg: Optional[str] = None

    def validate(self) -> "RunConfig":
        if self.noise_family not in ("normal", "laplace"):
            raise ConfigError(f"noise.family must be normal or laplace, got {self.noise_family!r}")
        if self.g_family != "uniform":
            raise ConfigError(f"env.g must be uniform, got {self.g_family!r}")
        if not self.theta_low < self.theta_high:
            raise ConfigError(
                f"env.theta_low ({self.theta_low}) must be below env.theta_high ({self.theta_high})"
            )
        if self.theta_low <= 0:
            raise ConfigError("env.theta_low must be positive (types index marginal cost)")
        if self.grid_points < 2:
            raise ConfigError("grid.points must be at least 2")
        if self.grid_spacing not in ("log", "linear"):
            raise ConfigError(f"grid.spacing must be log or linear, got {self.grid_spacing!r}")
        if self.quad_tol <= 0 or self.solver_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if not (0 < self.grid_min_mult < self.grid_max_mult):
            raise ConfigError("grid multiples must satisfy 0 < min < max")
        if self.mc_n < 10_000:
            raise ConfigError("mc.n must be at least 10000")
        return self


def _parse_affine(value: str, lineno: int) -> float:
    m = re.fullmatch(r"affine\(\s*([^)]+?)\s*\)", value)
    if not m:
        raise ConfigError(f"line {lineno}: env.v must look like affine(kappa), got {value!r}")
    try:
        return float(m.group(1))
    except ValueError:
        raise ConfigError(f"line {lineno}: bad kappa in env.v: {value!r}") from None


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()

    def fnum(key, raw, lineno):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} expects a number, got {raw!r}") from None

    def inum(key, raw, lineno):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} expects an integer, got {raw!r}") from None

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw_line!r}")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key == "noise.family":
            cfg = replace(cfg, noise_family=raw)
        elif key == "env.theta_low":
            cfg = replace(cfg, theta_low=fnum(key, raw, lineno))
        elif key == "env.theta_high":
            cfg = replace(cfg, theta_high=fnum(key, raw, lineno))
        elif key == "env.v":
            cfg = replace(cfg, v_kappa=_parse_affine(raw, lineno))
        elif key == "env.g":
            cfg = replace(cfg, g_family=raw)
        elif key == "grid.min_rho_mult":
            cfg = replace(cfg, grid_min_mult=fnum(key, raw, lineno))
        elif key == "grid.max_rho_mult":
            cfg = replace(cfg, grid_max_mult=fnum(key, raw, lineno))
        elif key == "grid.points":
            cfg = replace(cfg, grid_points=inum(key, raw, lineno))
        elif key == "grid.spacing":
            cfg = replace(cfg, grid_spacing=raw)
        elif key == "quad.tol":
            cfg = replace(cfg, quad_tol=fnum(key, raw, lineno))
        elif key == "solver.tol":
            cfg = replace(cfg, solver_tol=fnum(key, raw, lineno))
        elif key == "run.seed":
            cfg = replace(cfg, seed=inum(key, raw, lineno))
        elif key == "mc.n":
            cfg = replace(cfg, mc_n=inum(key, raw, lineno))
        elif key == "out.csv":
            cfg = replace(cfg, out_csv=raw)
        elif key == "out.svg":
            cfg = replace(cfg, out_svg=raw)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    return cfg.validate()


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return RunConfig().validate()
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def build_game(cfg: RunConfig, noise: Optional[NoiseModel] = None, env: Optional[Environment] = None) -> ScreeningGame:
    """Materialize the solver stack; library callers may inject custom
    noise/environment objects in place of the config-selected families."""
    noise = noise or make_noise(cfg.noise_family)
    env = env or Environment.uniform_affine(cfg.theta_low, cfg.theta_high, cfg.v_kappa)
    return ScreeningGame(noise, env, solver_tol=cfg.solver_tol)
