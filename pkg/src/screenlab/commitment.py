"""The principal's commitment benchmark: pre-announcing the approval standard.

With commitment the principal picks the adjusted standard ta before effort
is chosen, internalizing how the participation threshold Theta_hat(ta)
responds:

    Vbar(sigma) = max_ta  int_lo^Theta_hat(ta) v g dt * F(-ta)
                        + int_Theta_hat(ta)^hi v g F(f^-1(sigma/t)) dt.

The objective can in principle be multimodal (Theta_hat enters both
integrals), so the maximizer is located by a coarse scan over
[0, ta_hi] -- ta_hi being the smallest standard that deters every type --
followed by golden-section refinement on the winning bracket.  Local maxima
that tie with the best within 1e-6 are reported alongside the solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .environment import quad
from .equilibrium import ScreeningGame

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class CommitmentSolution:
    sigma: float
    tau_hat_star: float
    theta_hat_star: float
    value: float
    degenerate: bool = False
    near_optima: tuple[float, ...] = field(default_factory=tuple)


def committed_value(game: ScreeningGame, tau_hat: float, sigma: float, tol: float = 1e-10) -> float:
    """Principal value from committing to adjusted standard tau_hat."""
    env, noise = game.env, game.noise
    th = game.agent_threshold(tau_hat, sigma)
    lucky = env.integral_vg(env.theta_low, th) * noise.cdf(-tau_hat)
    if th >= env.theta_high:
        return lucky
    earned = quad(
        lambda t: env.v(t) * env.g(t) * noise.cdf(noise.inv_pdf_upper(sigma / t)),
        th,
        env.theta_high,
        tol,
    )
    return lucky + earned


def deterrence_standard(game: ScreeningGame, sigma: float) -> float:
    """Smallest adjusted standard at which every type gives up.

    Theta_hat is increasing in the standard, so {ta : Theta_hat(ta) = hi} is
    an upper half-line; locate its edge by doubling then bisection.
    """
    hi_type = game.env.theta_high

    def deterred(ta: float) -> bool:
        return game.agent_indifference_Q(hi_type, ta, sigma) <= 0.0

    ta_hi = 1.0
    for _ in range(200):
        if deterred(ta_hi):
            break
        ta_hi *= 2.0
    else:
        raise RuntimeError("no deterrence standard found")
    ta_lo = 0.0
    for _ in range(200):
        m = 0.5 * (ta_lo + ta_hi)
        if deterred(m):
            ta_hi = m
        else:
            ta_lo = m
        if ta_hi - ta_lo < 1e-10 * max(1.0, ta_hi):
            break
    return ta_hi


def solve_commitment(
    game: ScreeningGame,
    sigma: float,
    scan_points: int = 65,
    tol: float = 1e-8,
) -> CommitmentSolution:
    """Maximize the committed value over the adjusted standard."""
    ta_max = deterrence_standard(game, sigma)
    step = ta_max / (scan_points - 1)
    tas = [i * step for i in range(scan_points)]
    vals = [committed_value(game, ta, sigma) for ta in tas]

    best = max(range(scan_points), key=lambda i: vals[i])
    degenerate = vals[best] <= 0.0

    # Every interior coarse local maximum gets refined; ties within 1e-6 of
    # the best refined value are reported.
    candidates = [
        i
        for i in range(scan_points)
        if (i == 0 or vals[i] >= vals[i - 1]) and (i == scan_points - 1 or vals[i] >= vals[i + 1])
    ]
    refined: list[tuple[float, float]] = []
    for i in candidates:
        lo = tas[max(i - 1, 0)]
        hi = tas[min(i + 1, scan_points - 1)]
        ta_star = _golden_max(lambda ta: committed_value(game, ta, sigma), lo, hi, tol)
        refined.append((ta_star, committed_value(game, ta_star, sigma)))
    ta_best, v_best = max(refined, key=lambda pair: pair[1])
    near = tuple(
        ta for ta, v in refined if v >= v_best - 1e-6 and abs(ta - ta_best) > 10 * tol
    )
    return CommitmentSolution(
        sigma=sigma,
        tau_hat_star=ta_best,
        theta_hat_star=game.agent_threshold(ta_best, sigma),
        value=v_best,
        degenerate=degenerate,
        near_optima=near,
    )


def _golden_max(fn, a: float, b: float, tol: float) -> float:
    """Golden-section maximization on [a, b] to width tol."""
    h = b - a
    if h <= tol:
        return 0.5 * (a + b)
    n = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI_SQ * h
    d = a + _INV_PHI * h
    yc, yd = fn(c), fn(d)
    for _ in range(n - 1):
        if yc > yd:
            b, d, yd = d, c, yc
            h = _INV_PHI * h
            c = a + _INV_PHI_SQ * h
            yc = fn(c)
        else:
            a, c, yc = c, d, yd
            h = _INV_PHI * h
            d = a + _INV_PHI * h
            yd = fn(d)
    return 0.5 * (a + b) if yc > yd else 0.5 * (c + b)


def commitment_foc_residual(game: ScreeningGame, sol: CommitmentSolution) -> float:
    """First-order condition residual at the committed optimum (interior).

    -f(-ta) int_lo^th v g + v(th) g(th) [F(-ta) - F(f^-1(sigma/th))] dTheta_hat/dta.
    """
    env, noise = game.env, game.noise
    ta, th, sigma = sol.tau_hat_star, sol.theta_hat_star, sol.sigma
    x = noise.inv_pdf_upper(sigma / th)
    dtheta_dta = (sigma / th - noise.pdf(-ta)) / ((ta + x) * sigma / th**2)
    return (
        -noise.pdf(-ta) * env.integral_vg(env.theta_low, th)
        + env.v(th) * env.g(th) * (noise.cdf(-ta) - noise.cdf(x)) * dtheta_dta
    )
