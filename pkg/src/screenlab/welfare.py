"""Outcome functionals at an equilibrium and sweeps across precision levels.

All five functionals are integrals against the type density, split at the
participation threshold.  With x(theta) = f^-1(sigma/theta) and adjusted
standard ta:

    V     = int_lo^th v g dt * F(-ta) + int_th^hi v g F(x) dt
    AR    = G(th) F(-ta)             + int_th^hi g F(x) dt
    U     = G(th) F(-ta)             + int_th^hi g [F(x) - (sigma/t)(ta + x)] dt
    alpha = int_tilde^hi g F(-x) dt                      (good types rejected)
    beta  = G(th) F(-ta) + int_th^tilde g F(x) dt        (bad types approved)

Approvals above theta_tilde partition as beta + (Pr(theta >= tilde) - alpha)
= AR, an identity the tests check row by row.

The Lehmann-style accuracy comparison for a type pair reduces, for
equilibrium signal structures, to comparing F(F^-1(p) + d/sigma) across
noise levels, where d is the effort difference of the pair; it is evaluated
pointwise on a p-grid exactly in that form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .environment import Environment, quad
from .equilibrium import Equilibrium, ScreeningGame, cdf_vec, inv_pdf_upper_vec
from .noise import NoiseModel


@dataclass(frozen=True)
class WelfareReport:
    V: float
    AR: float
    U: float
    alpha: float
    beta: float


# -- noise quantile -----------------------------------------------------------


def noise_quantile(noise: NoiseModel, p):
    """Inverse noise cdf F^-1(p), vectorized.

    Laplace is closed-form; the normal uses the library rational
    approximation polished by two Newton steps.  Custom families fall back
    to bisection per point.
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr < 0.0) | (p_arr > 1.0)):
        raise ValueError("quantile argument outside [0, 1]")
    if noise.family == "normal":
        from scipy.special import ndtr, ndtri

        with np.errstate(divide="ignore"):
            x = ndtri(p_arr)
        for _ in range(2):
            with np.errstate(invalid="ignore", under="ignore"):
                dens = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
                step = np.where(dens > 0.0, (ndtr(x) - p_arr) / np.where(dens > 0, dens, 1.0), 0.0)
            x = x - step
        out = x
    elif noise.family == "laplace":
        with np.errstate(divide="ignore"):
            out = np.where(
                p_arr < 0.5,
                np.log(np.maximum(2.0 * p_arr, 0.0)),
                -np.log(np.maximum(2.0 * (1.0 - p_arr), 0.0)),
            )
    else:
        def scalar(pp: float) -> float:
            if pp <= 0.0:
                return -math.inf
            if pp >= 1.0:
                return math.inf
            lo, hi = -1.0, 1.0
            while noise.cdf(lo) > pp:
                lo *= 2.0
            while noise.cdf(hi) < pp:
                hi *= 2.0
            for _ in range(200):
                m = 0.5 * (lo + hi)
                if noise.cdf(m) < pp:
                    lo = m
                else:
                    hi = m
                if hi - lo < 1e-13:
                    break
            return 0.5 * (lo + hi)

        out = np.vectorize(scalar, otypes=[float])(p_arr)
    return out if isinstance(p, np.ndarray) else float(out)


# -- functionals --------------------------------------------------------------


def principal_payoff(game: ScreeningGame, eq: Equilibrium, tol: float = 1e-10) -> float:
    """Ex ante principal payoff V at the equilibrium."""
    if eq.is_pooling:
        return 0.0
    env, noise, sigma = game.env, game.noise, eq.sigma
    lucky = env.integral_vg(env.theta_low, eq.theta_hat) * noise.cdf(-eq.tau_hat)
    earned = quad(
        lambda t: env.v(t) * env.g(t) * noise.cdf(noise.inv_pdf_upper(sigma / t)),
        eq.theta_hat,
        env.theta_high,
        tol,
    )
    return lucky + earned


def approval_rate(game: ScreeningGame, eq: Equilibrium, tol: float = 1e-10) -> float:
    if eq.is_pooling:
        return 0.0
    env, noise, sigma = game.env, game.noise, eq.sigma
    lucky = env.cdf_g(eq.theta_hat) * noise.cdf(-eq.tau_hat)
    earned = quad(
        lambda t: env.g(t) * noise.cdf(noise.inv_pdf_upper(sigma / t)),
        eq.theta_hat,
        env.theta_high,
        tol,
    )
    return lucky + earned


def agent_payoff(game: ScreeningGame, eq: Equilibrium, tol: float = 1e-10) -> float:
    """Ex ante agent payoff U: approval probability net of effort cost."""
    if eq.is_pooling:
        return 0.0
    env, noise, sigma = game.env, game.noise, eq.sigma
    lucky = env.cdf_g(eq.theta_hat) * noise.cdf(-eq.tau_hat)

    def net(t: float) -> float:
        x = noise.inv_pdf_upper(sigma / t)
        return env.g(t) * (noise.cdf(x) - (sigma / t) * (eq.tau_hat + x))

    return lucky + quad(net, eq.theta_hat, env.theta_high, tol)


def type_errors(game: ScreeningGame, eq: Equilibrium, tol: float = 1e-10) -> tuple[float, float]:
    """(alpha, beta): good types rejected, bad types approved."""
    env, noise = game.env, game.noise
    tt = env.theta_tilde()
    if eq.is_pooling:
        return env.cdf_g(env.theta_high) - env.cdf_g(tt), 0.0
    sigma = eq.sigma
    alpha = quad(
        lambda t: env.g(t) * noise.cdf(-noise.inv_pdf_upper(sigma / t)),
        tt,
        env.theta_high,
        tol,
    )
    beta = env.cdf_g(eq.theta_hat) * noise.cdf(-eq.tau_hat)
    if eq.theta_hat < tt:
        beta += quad(
            lambda t: env.g(t) * noise.cdf(noise.inv_pdf_upper(sigma / t)),
            eq.theta_hat,
            tt,
            tol,
        )
    return alpha, beta


def welfare_report(game: ScreeningGame, eq: Equilibrium, tol: float = 1e-10) -> WelfareReport:
    alpha, beta = type_errors(game, eq, tol)
    return WelfareReport(
        V=principal_payoff(game, eq, tol),
        AR=approval_rate(game, eq, tol),
        U=agent_payoff(game, eq, tol),
        alpha=alpha,
        beta=beta,
    )


# -- accuracy comparison -------------------------------------------------------


class AccuracyOrder(enum.Enum):
    MORE_ACCURATE = "MoreAccurate"
    LESS_ACCURATE = "LessAccurate"
    EQUIVALENT = "Equivalent"
    INCOMPARABLE = "Incomparable"


def accuracy_compare(
    game: ScreeningGame,
    theta: float,
    theta_prime: float,
    sigma: float,
    sigma_prime: float,
    p_grid: Sequence[float],
    tol: float = 0.0,
) -> AccuracyOrder:
    """Rank the equilibrium information structures at two noise scales for
    the type pair (theta, theta_prime), pointwise over a p-grid.

    Returns how the sigma structure compares with the sigma_prime one:
    MORE_ACCURATE means the quantile transform lies weakly below it at
    every grid point (strictly somewhere).
    """
    if not theta < theta_prime:
        raise ValueError(f"need theta < theta_prime, got {theta} >= {theta_prime}")

    def transform(s: float) -> np.ndarray:
        eq = game.solve_semiseparating(s)
        if eq is None:
            raise ValueError(f"no semi-separating equilibrium at sigma={s}")
        sched = game.effort_schedule(eq)
        shift = float(sched(theta) - sched(theta_prime)) / s
        base = noise_quantile(game.noise, np.asarray(p_grid, dtype=float))
        return cdf_vec(game.noise, base + shift)

    a = transform(sigma)
    b = transform(sigma_prime)
    below = bool(np.all(a <= b + tol))
    above = bool(np.all(a >= b - tol))
    if below and above:
        return AccuracyOrder.EQUIVALENT
    if below:
        return AccuracyOrder.MORE_ACCURATE
    if above:
        return AccuracyOrder.LESS_ACCURATE
    return AccuracyOrder.INCOMPARABLE


# -- sweeps ---------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    rho: float
    sigma: float
    exists: bool
    tau: float
    tau_hat: float
    theta_hat: float
    theta_hat_gap_log: float
    report: Optional[WelfareReport]


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    CSV_HEADER = "rho,sigma,exists,theta_hat,tau,tau_hat,V,AR,U,alpha,beta"

    def existing(self) -> list[SweepRow]:
        return [r for r in self.rows if r.exists]

    def column(self, name: str) -> np.ndarray:
        """Column over existing rows (welfare names or coordinate names)."""
        rows = self.existing()
        if name in ("V", "AR", "U", "alpha", "beta"):
            return np.array([getattr(r.report, name) for r in rows])
        return np.array([getattr(r, name) for r in rows])

    def to_csv(self) -> str:
        def num(x: float) -> str:
            return format(x, ".17g")

        lines = [self.CSV_HEADER]
        for r in self.rows:
            if r.exists:
                rep = r.report
                lines.append(
                    ",".join(
                        [
                            num(r.rho),
                            num(r.sigma),
                            "1",
                            num(r.theta_hat),
                            num(r.tau),
                            num(r.tau_hat),
                            num(rep.V),
                            num(rep.AR),
                            num(rep.U),
                            num(rep.alpha),
                            num(rep.beta),
                        ]
                    )
                )
            else:
                lines.append(",".join([num(r.rho), num(r.sigma), "0"] + [""] * 8))
        return "\n".join(lines) + "\n"


def parse_sweep_csv(text: str) -> SweepResult:
    """Inverse of SweepResult.to_csv (used by round-trip checks and tools)."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    if lines[0] != SweepResult.CSV_HEADER:
        raise ValueError(f"unexpected CSV header: {lines[0]!r}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rho, sigma = float(parts[0]), float(parts[1])
        exists = parts[2] == "1"
        if exists:
            th, tau, ta = (float(parts[i]) for i in (3, 4, 5))
            rep = WelfareReport(*(float(parts[i]) for i in range(6, 11)))
            rows.append(SweepRow(rho, sigma, True, tau, ta, th, math.nan, rep))
        else:
            rows.append(
                SweepRow(rho, sigma, False, math.inf, math.inf, math.nan, math.nan, None)
            )
    return SweepResult(tuple(rows))


def default_rho_grid(
    game: ScreeningGame,
    points: int = 60,
    lo_mult: float = 0.8,
    hi_mult: float = 100.0,
    spacing: str = "log",
) -> np.ndarray:
    """Precision grid in multiples of the existence threshold rho_tilde."""
    rho_tilde = 1.0 / game.sigma_tilde()
    if spacing == "log":
        return np.geomspace(lo_mult * rho_tilde, hi_mult * rho_tilde, points)
    if spacing == "linear":
        return np.linspace(lo_mult * rho_tilde, hi_mult * rho_tilde, points)
    raise ValueError(f"unknown grid spacing {spacing!r}")


def sweep(game: ScreeningGame, rho_grid: Sequence[float], tol: float = 1e-10) -> SweepResult:
    """One row per precision level, in grid order.

    Rows are independent, so workers may compute them concurrently; output
    order follows the grid regardless.
    """
    rhos = [float(r) for r in rho_grid]
    if any(b <= a for a, b in zip(rhos[:-1], rhos[1:])):
        raise ValueError("rho grid must be strictly increasing")

    def one(rho: float) -> SweepRow:
        eq = game.solve_semiseparating(1.0 / rho)
        if eq is None:
            return SweepRow(rho, 1.0 / rho, False, math.inf, math.inf, math.nan, math.nan, None)
        return SweepRow(
            rho,
            eq.sigma,
            True,
            eq.tau,
            eq.tau_hat,
            eq.theta_hat,
            eq.theta_hat_gap_log,
            welfare_report(game, eq, tol),
        )

    workers = _worker_count()
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, rhos))
    else:
        rows = [one(r) for r in rhos]
    return SweepResult(tuple(rows))


def _worker_count() -> int:
    import os

    raw = os.environ.get("SCREENLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
