"""Robustness variants: general convex costs, binary effort, linear reputation.

These exist to show the pitfall mechanism survives beyond linear costs.
What carries over is the extensive margin: a discrete low-to-high effort
switch by marginal types as precision rises.

* General convex costs C(e, theta) (built-in quadratic e^2 / (2 theta)).
  The marginal benefit rho f(rho (tau - e)) is single-peaked around the
  standard while marginal cost rises, so the first-order condition can have
  several roots; the best response enumerates them on an effort grid,
  refines each bracket by bisection, and keeps the payoff argmax.  The
  equilibrium pairs the principal's indifference at the standard with the
  agent's branch-switch threshold.

* Binary effort e in {0, ebar} with cost c(theta) (built-in kappa / theta).
  The gain from high effort is Delta(tau, rho) = F(rho tau) - F(rho (tau -
  ebar)), so the cutoff type is c^-1(Delta) and only the principal
  indifference remains to solve.

* Linear reputation (normal-quadratic): closed forms for the effort slope
  k = omega^2 / (omega^2 + 1/rho^2) and posterior-mean variance q = k
  omega^2, the contrast case where precision helps on the intensive margin
  only and no pitfall can arise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .environment import Environment
from .equilibrium import cdf_vec
from .noise import NoiseModel


@dataclass(frozen=True)
class CostSpec:
    """Convex effort cost with decreasing marginal cost in type.

    Both callables must broadcast over numpy arrays.
    """

    name: str
    cost: Callable[[np.ndarray, np.ndarray], np.ndarray]  # C(e, theta)
    marginal: Callable[[np.ndarray, np.ndarray], np.ndarray]  # C_e(e, theta)


def quadratic_cost() -> CostSpec:
    return CostSpec(
        name="quadratic",
        cost=lambda e, t: e * e / (2.0 * t),
        marginal=lambda e, t: e / t,
    )


def _pdf_vec(noise: NoiseModel, z) -> np.ndarray:
    """Vectorized density (closed forms for the built-ins)."""
    z = np.asarray(z, dtype=float)
    with np.errstate(under="ignore"):
        if noise.family == "normal":
            return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        if noise.family == "laplace":
            return 0.5 * np.exp(-np.abs(z))
    return np.vectorize(noise.pdf, otypes=[float])(z)


@dataclass(frozen=True)
class GeneralCostEquilibrium:
    rho: float
    tau: float
    theta_hat: float
    theta_grid: np.ndarray
    e_low: np.ndarray
    e_high: np.ndarray
    value: float
    residual: float


@dataclass(frozen=True)
class BinaryEffortEquilibrium:
    rho: float
    ebar: float
    tau: float
    theta_hat: float
    delta: float
    value: float
    residual: float


# -- convex-cost best response -------------------------------------------------


def _branch_table(
    noise: NoiseModel,
    thetas: np.ndarray,
    tau: float,
    rho: float,
    cost: CostSpec,
    effort_points: int = 2048,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(e_low, e_high, payoff gap high - low) per type.

    Enumerates first-order-condition roots by sign scan of the marginal
    payoff rho f(rho (tau - e)) - C_e(e, theta) over a shared effort grid on
    [0, tau + 6 sigma], refines every bracket by (vectorized) bisection, then
    picks per type the best candidate below the standard (corner 0 included)
    and the best at or above it.  e_high is nan where the high branch has no
    critical point; gap is -inf there.
    """
    thetas = np.asarray(thetas, dtype=float)
    sigma = 1.0 / rho
    e_grid = np.linspace(0.0, tau + 6.0 * sigma, effort_points)
    benefit = rho * _pdf_vec(noise, rho * (tau - e_grid))
    margins = benefit[None, :] - cost.marginal(e_grid[None, :], thetas[:, None])
    flip = np.signbit(margins[:, :-1]) != np.signbit(margins[:, 1:])
    rows, cols = np.nonzero(flip)

    lo = e_grid[cols]
    hi = e_grid[cols + 1]
    lo_pos = margins[rows, cols] > 0.0
    th_b = thetas[rows]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = rho * _pdf_vec(noise, rho * (tau - mid)) - cost.marginal(mid, th_b)
        mid_pos = f_mid > 0.0
        same = mid_pos == lo_pos
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    roots = 0.5 * (lo + hi)

    n = thetas.size
    e_low = np.zeros(n)
    pay_low = cdf_vec(noise, np.full(n, -rho * tau)) - cost.cost(np.zeros(n), thetas)
    e_high = np.full(n, math.nan)
    pay_high = np.full(n, -math.inf)
    root_pay = cdf_vec(noise, rho * (roots - tau)) - cost.cost(roots, th_b)
    for r, e, p in zip(rows, roots, root_pay):
        if e < tau:
            if p > pay_low[r]:
                e_low[r], pay_low[r] = e, p
        elif p > pay_high[r]:
            e_high[r], pay_high[r] = e, p
    return e_low, e_high, pay_high - pay_low


def convex_cost_best_response(
    noise: NoiseModel,
    theta: float,
    tau: float,
    rho: float,
    cost: CostSpec,
    effort_points: int = 2048,
) -> tuple[float, str]:
    """Globally optimal effort and its branch tag ('low' below the standard,
    'high' at or above it).  The corner e = 0 always competes."""
    e_low, e_high, gap = _branch_table(
        noise, np.asarray([theta]), tau, rho, cost, effort_points
    )
    if gap[0] >= 0.0:
        return float(e_high[0]), "high"
    return float(e_low[0]), "low"


def _switch_threshold(
    noise: NoiseModel,
    env: Environment,
    tau: float,
    rho: float,
    cost: CostSpec,
) -> float:
    """Type at which the high branch overtakes the low branch (single
    crossing via C_e decreasing in theta); corners when one branch dominates
    everywhere.  Ties at the threshold go to the high branch."""
    lo, hi = env.theta_low, env.theta_high

    def gap_at(t: float) -> float:
        return float(_branch_table(noise, np.asarray([t]), tau, rho, cost)[2][0])

    if gap_at(hi) < 0.0:
        return hi
    if gap_at(lo) >= 0.0:
        return lo
    a, b = lo, hi
    for _ in range(80):
        m = 0.5 * (a + b)
        if gap_at(m) < 0.0:
            a = m
        else:
            b = m
        if b - a < 1e-10:
            break
    return 0.5 * (a + b)


class _ConvexCostTables:
    """Per-tau state shared between the residual and value integrals.

    The two region integrals are continuous in tau: interior nodes use the
    branch tables, and the cell containing the switch threshold is split
    there, each side integrated with 3-point Gauss-Legendre and per-point
    branch solves.
    """

    _GL3 = np.polynomial.legendre.leggauss(3)

    def __init__(self, noise, env, rho, cost, thetas, g_vals, v_vals, tau):
        self.noise, self.env, self.rho, self.cost, self.tau = noise, env, rho, cost, tau
        self.thetas, self.g_vals, self.v_vals = thetas, g_vals, v_vals
        self.e_low, self.e_high, _ = _branch_table(noise, thetas, tau, rho, cost)
        self.theta_hat = _switch_threshold(noise, env, tau, rho, cost)

    def _point(self, t: float, branch: str) -> tuple[float, float]:
        e_low, e_high, _ = _branch_table(
            self.noise, np.asarray([t]), self.tau, self.rho, self.cost
        )
        e = float(e_low[0]) if branch == "low" or math.isnan(e_high[0]) else float(e_high[0])
        dens = self.rho * float(_pdf_vec(self.noise, self.rho * (self.tau - e)))
        appr = self.noise.cdf(self.rho * (e - self.tau))
        w = self.env.v(t) * self.env.g(t)
        return w * dens, w * appr

    def _gl_segment(self, a: float, b: float, branch: str) -> tuple[float, float]:
        if b <= a:
            return 0.0, 0.0
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        resid = value = 0.0
        for x, w in zip(*self._GL3):
            r, vv = self._point(mid + half * x, branch)
            resid += w * r
            value += w * vv
        return half * resid, half * value

    def integrals(self) -> tuple[float, float]:
        th, thetas = self.theta_hat, self.thetas
        k = int(np.searchsorted(thetas, th, side="right")) - 1
        k = min(max(k, 0), thetas.size - 2)

        effort = np.where(thetas < th, self.e_low, np.where(np.isnan(self.e_high), self.e_low, self.e_high))
        dens = self.rho * _pdf_vec(self.noise, self.rho * (self.tau - effort))
        appr = cdf_vec(self.noise, self.rho * (effort - self.tau))
        w = self.v_vals * self.g_vals

        resid = value = 0.0
        if k > 0:
            resid += float(np.trapezoid((w * dens)[: k + 1], thetas[: k + 1]))
            value += float(np.trapezoid((w * appr)[: k + 1], thetas[: k + 1]))
        r, vv = self._gl_segment(float(thetas[k]), th, "low")
        resid, value = resid + r, value + vv
        r, vv = self._gl_segment(th, float(thetas[k + 1]), "high")
        resid, value = resid + r, value + vv
        if k + 1 < thetas.size - 1:
            resid += float(np.trapezoid((w * dens)[k + 1 :], thetas[k + 1 :]))
            value += float(np.trapezoid((w * appr)[k + 1 :], thetas[k + 1 :]))
        return resid, value


def solve_convex_cost_equilibrium(
    noise: NoiseModel,
    env: Environment,
    rho: float,
    cost: Optional[CostSpec] = None,
    theta_points: int = 257,
    tau_scan_points: int = 32,
) -> Optional[GeneralCostEquilibrium]:
    """Equilibrium standard under convex costs, or None outside the solvable
    range.  With several indifference roots in tau, the one with the highest
    principal value is returned."""
    cost = cost or quadratic_cost()
    thetas = np.linspace(env.theta_low, env.theta_high, theta_points)
    g_vals = np.array([env.g(float(t)) for t in thetas])
    v_vals = np.array([env.v(float(t)) for t in thetas])

    def residual_and_value(tau: float) -> tuple[float, float]:
        tables = _ConvexCostTables(noise, env, rho, cost, thetas, g_vals, v_vals, tau)
        return tables.integrals()

    tau_hi = math.sqrt(2.0 * env.theta_high) * 1.2  # beyond this even the top type balks
    taus = np.linspace(0.05, tau_hi, tau_scan_points)
    resids = [residual_and_value(float(t))[0] for t in taus]
    brackets = [
        (float(taus[i]), float(taus[i + 1]))
        for i in range(len(taus) - 1)
        if (resids[i] > 0.0) != (resids[i + 1] > 0.0)
    ]
    if not brackets:
        return None

    solutions = []
    for lo, hi in brackets:
        r_lo = residual_and_value(lo)[0]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            r_mid = residual_and_value(mid)[0]
            if (r_mid > 0.0) == (r_lo > 0.0):
                lo, r_lo = mid, r_mid
            else:
                hi = mid
            if hi - lo < 1e-10:
                break
        tau_star = 0.5 * (lo + hi)
        resid, value = residual_and_value(tau_star)
        solutions.append((value, tau_star, resid))
    value, tau_star, resid = max(solutions)
    tables = _ConvexCostTables(noise, env, rho, cost, thetas, g_vals, v_vals, tau_star)
    return GeneralCostEquilibrium(
        rho=rho,
        tau=tau_star,
        theta_hat=tables.theta_hat,
        theta_grid=thetas,
        e_low=tables.e_low,
        e_high=tables.e_high,
        value=value,
        residual=resid,
    )


# -- binary effort ---------------------------------------------------------------


def binary_gain(noise: NoiseModel, tau: float, rho: float, ebar: float) -> float:
    """Delta(tau, rho) = F(rho tau) - F(rho (tau - ebar)): approval gain from
    choosing high effort."""
    return noise.cdf(rho * tau) - noise.cdf(rho * (tau - ebar))


def binary_effort_equilibrium(
    noise: NoiseModel,
    env: Environment,
    rho: float,
    ebar: float = 1.0,
    cost_kappa: float = 8.0,
    tau_scan_points: int = 129,
) -> Optional[BinaryEffortEquilibrium]:
    """Equilibrium of the binary-effort variant with c(theta) = kappa/theta.

    Solves the principal indifference in tau on (0, ebar) jointly with the
    cutoff theta_hat = clamp(kappa / Delta(tau, rho)); None if no root.
    """

    def cutoff(tau: float) -> float:
        delta = binary_gain(noise, tau, rho, ebar)
        if delta <= cost_kappa / env.theta_high:
            return env.theta_high
        return min(max(cost_kappa / delta, env.theta_low), env.theta_high)

    def residual(tau: float) -> float:
        th = cutoff(tau)
        return math.exp(noise.log_pdf(rho * tau)) * env.integral_vg(
            env.theta_low, th
        ) + math.exp(noise.log_pdf(rho * (tau - ebar))) * env.integral_vg(th, env.theta_high)

    def value(tau: float) -> float:
        th = cutoff(tau)
        return (1.0 - noise.cdf(rho * tau)) * env.integral_vg(env.theta_low, th) + (
            1.0 - noise.cdf(rho * (tau - ebar))
        ) * env.integral_vg(th, env.theta_high)

    eps = 1e-6 * ebar
    taus = np.linspace(eps, ebar - eps, tau_scan_points)
    resids = [residual(float(t)) for t in taus]
    brackets = [
        (float(taus[i]), float(taus[i + 1]))
        for i in range(len(taus) - 1)
        if (resids[i] > 0.0) != (resids[i + 1] > 0.0)
    ]
    if not brackets:
        return None
    solutions = []
    for lo, hi in brackets:
        r_lo = residual(lo)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            r_mid = residual(mid)
            if (r_mid > 0.0) == (r_lo > 0.0):
                lo, r_lo = mid, r_mid
            else:
                hi = mid
            if hi - lo < 1e-12:
                break
        tau_star = 0.5 * (lo + hi)
        solutions.append((value(tau_star), tau_star))
    val, tau_star = max(solutions)
    return BinaryEffortEquilibrium(
        rho=rho,
        ebar=ebar,
        tau=tau_star,
        theta_hat=cutoff(tau_star),
        delta=binary_gain(noise, tau_star, rho, ebar),
        value=val,
        residual=residual(tau_star),
    )


# -- linear reputation -------------------------------------------------------------


def linear_reputation(rho: float, mu: float, omega: float) -> tuple[float, float]:
    """Effort slope and posterior-mean variance of the normal-quadratic
    reputation example: k = omega^2/(omega^2 + 1/rho^2), q = k omega^2."""
    if omega <= 0.0 or rho <= 0.0:
        raise ValueError("omega and rho must be positive")
    k = omega**2 / (omega**2 + 1.0 / rho**2)
    return k, k * omega**2
