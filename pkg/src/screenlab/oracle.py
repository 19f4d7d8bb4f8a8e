"""Independent verification of solved equilibria: brute force and simulation.

Nothing here reuses the solver's algebra.  Agent optimality is checked by
grid search over raw payoffs, the principal's indifference by integrating
the actual posterior-weighted density at the standard (no substitution of
the first-order identity), and the welfare functionals by seeded Monte
Carlo draws of (type, noise) pairs pushed through the equilibrium policy.

The generator is counter-based (Philox keyed by (seed, shard index)), so a
run sharded across workers aggregates to the same estimate regardless of
scheduling, and the same seed reproduces bit-identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .environment import quad
from .equilibrium import Equilibrium, ScreeningGame, cdf_vec
from .welfare import noise_quantile

_SHARD = 1 << 16


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    se: float

    def within(self, target: float, n_se: float = 3.0) -> bool:
        return abs(self.value - target) <= n_se * self.se


@dataclass(frozen=True)
class OracleReport:
    seed: int
    n: int
    max_br_violation: float
    principal_residual: Optional[float]  # None for pooling (tagged skip)
    V: MonteCarloEstimate
    AR: MonteCarloEstimate
    U: MonteCarloEstimate
    alpha: MonteCarloEstimate
    beta: MonteCarloEstimate

    def lines(self) -> list[str]:
        out = [
            f"seed={self.seed}",
            f"n={self.n}",
            f"max_br_violation={self.max_br_violation:.6e}",
            "principal_residual="
            + ("skip" if self.principal_residual is None else f"{self.principal_residual:.6e}"),
        ]
        for name in ("V", "AR", "U", "alpha", "beta"):
            est: MonteCarloEstimate = getattr(self, name)
            out.append(f"{name}={est.value:.10f}")
            out.append(f"{name}_se={est.se:.3e}")
        return out


def verify_agent_best_response(
    game: ScreeningGame,
    eq: Equilibrium,
    type_grid: int = 65,
    effort_grid: int = 4096,
    tau_override: Optional[float] = None,
) -> float:
    """Worst payoff improvement any grid type can get from any grid effort
    over the equilibrium schedule.  Nonpositive (up to grid resolution) at a
    true equilibrium; tau_override perturbs the standard to show the check
    has teeth."""
    env = game.env
    if eq.is_pooling:
        return 0.0  # zero effort dominates when nothing is ever approved
    tau = eq.tau if tau_override is None else tau_override
    sigma = eq.sigma
    thetas = np.linspace(env.theta_low, env.theta_high, type_grid)
    efforts = np.linspace(0.0, tau + 6.0 * sigma, effort_grid)
    sched = game.effort_schedule(eq)
    e_star = sched(thetas)
    pay_star = cdf_vec(game.noise, (e_star - tau) / sigma) - e_star / thetas
    # payoff matrix over (type, effort)
    appr = cdf_vec(game.noise, (efforts - tau) / sigma)
    pay = appr[None, :] - efforts[None, :] / thetas[:, None]
    return float(np.max(pay.max(axis=1) - pay_star))


def verify_principal_indifference(
    game: ScreeningGame, eq: Equilibrium, tol: float = 1e-9, tau_override: Optional[float] = None
) -> Optional[float]:
    """Posterior-value residual int v g f_sigma(tau - e*(t)) dt at the
    standard, by direct quadrature of the signal density (the first-order
    identity is never substituted).  None for pooling."""
    if eq.is_pooling:
        return None
    env, noise, sigma = game.env, game.noise, eq.sigma
    tau = eq.tau if tau_override is None else tau_override
    sched = game.effort_schedule(eq)

    def integrand(t: float) -> float:
        e = float(sched(t))
        return env.v(t) * env.g(t) * math.exp(noise.log_pdf((tau - e) / sigma)) / sigma

    below = quad(integrand, env.theta_low, eq.theta_hat, tol) if eq.theta_hat > env.theta_low else 0.0
    above = quad(integrand, eq.theta_hat, env.theta_high, tol)
    return below + above


def monte_carlo_welfare(
    game: ScreeningGame,
    eq: Equilibrium,
    n: int = 1_000_000,
    seed: int = 42,
) -> OracleReport:
    """Simulate the equilibrium and report all five functionals with
    standard errors, plus the two brute-force checks."""
    if n < 10_000:
        raise ValueError("need at least 1e4 draws for meaningful errors")
    env, noise = game.env, game.noise
    tt = env.theta_tilde()
    sched = game.effort_schedule(eq)
    v_vec = np.vectorize(env.v, otypes=[float])

    sums = np.zeros(5)
    sumsq = np.zeros(5)
    done = 0
    shard = 0
    while done < n:
        m = min(_SHARD, n - done)
        gen = np.random.Generator(np.random.Philox(key=np.array([seed, shard], dtype=np.uint64)))
        u_theta = gen.random(m)
        u_eps = gen.random(m)
        theta = env.type_quantile(u_theta)
        eps = noise_quantile(noise, u_eps)
        e = sched(theta)
        if eq.is_pooling:
            approve = np.zeros(m, dtype=bool)
        else:
            s = e + eq.sigma * eps
            approve = s > eq.tau
        good = theta >= tt
        draws = np.stack(
            [
                v_vec(theta) * approve,          # V
                approve.astype(float),           # AR
                approve - e / theta,             # U
                (~approve & good).astype(float), # alpha
                (approve & ~good).astype(float), # beta
            ]
        )
        sums += draws.sum(axis=1)
        sumsq += (draws * draws).sum(axis=1)
        done += m
        shard += 1

    mean = sums / n
    var = (sumsq - n * mean * mean) / (n - 1)
    se = np.sqrt(np.maximum(var, 0.0) / n)
    ests = [MonteCarloEstimate(float(mean[i]), float(se[i])) for i in range(5)]
    return OracleReport(
        seed=seed,
        n=n,
        max_br_violation=verify_agent_best_response(game, eq),
        principal_residual=verify_principal_indifference(game, eq),
        V=ests[0],
        AR=ests[1],
        U=ests[2],
        alpha=ests[3],
        beta=ests[4],
    )
