"""Type distribution, principal payoff, and the derived thresholds.

An environment is a positive type interval [theta_low, theta_high], a type
density g, and a weakly increasing approval payoff v.  The screening problem
only ever touches it through three integral functionals, so those are cached
as cumulative tables on a fixed grid (per-cell 5-point Gauss-Legendre, which
is effectively exact for smooth g and v):

    int v g,    int v g / theta,    int g.

Derived objects:

* theta_tilde  -- smallest type with v >= 0 (good/bad cutoff),
* theta_dagger -- smallest threshold at which the cost-weighted residual
                  value J(t) = int_t^hi v g / theta becomes nonnegative,
* ratio_R      -- R(t) = (int_t^hi v g/theta) / (int_lo^t v g), the quantity
                  whose inverse image under -sigma R(.) is the principal's
                  precision-adjusted standard.

The built-in family is uniform g with affine v(theta) = theta - kappa; any
(g, v) pair of smooth callables is accepted through the same constructor.
Instances are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .noise import CheckResult

_GRID_CELLS = 4096
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


class InfeasibleEnvironmentError(ValueError):
    """v < 0 on the whole type interval: no good types exist."""


class OutOfScopeEnvironmentError(ValueError):
    """The 1/theta-weighted prior is not pessimistic (J(theta_low) >= 0)."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


def quad(fn: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive quadrature of fn over [a, b] with absolute tolerance tol."""
    if a > b:
        raise ValueError(f"empty interval [{a}, {b}]")
    if a == b:
        return 0.0
    out = integrate.quad(fn, a, b, epsabs=tol, epsrel=1e-11, limit=400, full_output=1)
    value, abserr = out[0], out[1]
    if len(out) > 3 and abserr > 10.0 * max(tol, 1e-13 * abs(value)):
        raise QuadratureError(f"quadrature did not converge: {out[3]}")
    return value


class Environment:
    def __init__(
        self,
        theta_low: float,
        theta_high: float,
        g: Callable[[float], float],
        v: Callable[[float], float],
        family: str = "custom",
    ) -> None:
        if not (theta_low > 0.0 and theta_low < theta_high):
            raise ValueError(f"need 0 < theta_low < theta_high, got [{theta_low}, {theta_high}]")
        self.theta_low = float(theta_low)
        self.theta_high = float(theta_high)
        self.g = g
        self.v = v
        self.family = family
        self._build_tables()
        self._theta_tilde: Optional[float] = None
        self._theta_dagger: Optional[float] = None

    @classmethod
    def uniform_affine(cls, theta_low: float, theta_high: float, kappa: float) -> "Environment":
        """Uniform types on [theta_low, theta_high] with v(theta) = theta - kappa."""
        width = theta_high - theta_low
        return cls(
            theta_low,
            theta_high,
            g=lambda t: 1.0 / width,
            v=lambda t: t - kappa,
            family=f"uniform-affine(kappa={kappa:g})",
        )

    # -- cached integral tables ---------------------------------------------

    def _build_tables(self) -> None:
        nodes = np.linspace(self.theta_low, self.theta_high, _GRID_CELLS + 1)
        mid = 0.5 * (nodes[:-1] + nodes[1:])
        half = 0.5 * (nodes[1:] - nodes[:-1])
        # (cells, 5) evaluation points for per-cell Gauss-Legendre.
        pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        gv = np.vectorize(self.g, otypes=[float])(pts)
        vv = np.vectorize(self.v, otypes=[float])(pts)
        w = half[:, None] * _GL_WEIGHTS[None, :]

        def cum(values: np.ndarray) -> np.ndarray:
            out = np.empty(_GRID_CELLS + 1)
            out[0] = 0.0
            np.cumsum(np.sum(values * w, axis=1), out=out[1:])
            return out

        self._nodes = nodes
        self._cum_vg = cum(vv * gv)
        self._cum_vg_over_t = cum(vv * gv / pts)
        self._cum_g = cum(gv)

    def _partial_cell(self, kind: str, a: float, b: float) -> float:
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        pts = mid + half * _GL_NODES
        gv = np.array([self.g(float(t)) for t in pts])
        vv = np.array([self.v(float(t)) for t in pts])
        if kind == "vg":
            vals = vv * gv
        elif kind == "vg/t":
            vals = vv * gv / pts
        else:
            vals = gv
        return float(half * np.dot(_GL_WEIGHTS, vals))

    def _cum_at(self, kind: str, x: float) -> float:
        table = {"vg": self._cum_vg, "vg/t": self._cum_vg_over_t, "g": self._cum_g}[kind]
        x = min(max(x, self.theta_low), self.theta_high)
        k = int(np.searchsorted(self._nodes, x, side="right")) - 1
        k = min(max(k, 0), _GRID_CELLS)
        base = float(table[k])
        if x > self._nodes[k]:
            base += self._partial_cell(kind, float(self._nodes[k]), x)
        return base

    def integral_vg(self, a: float, b: float) -> float:
        """int_a^b v(t) g(t) dt from the cached table."""
        return self._cum_at("vg", b) - self._cum_at("vg", a)

    def integral_vg_over_theta(self, a: float, b: float) -> float:
        """int_a^b v(t) g(t) / t dt from the cached table."""
        return self._cum_at("vg/t", b) - self._cum_at("vg/t", a)

    def cdf_g(self, theta: float) -> float:
        """Type distribution G(theta)."""
        return self._cum_at("g", theta)

    def type_quantile(self, u):
        """Inverse of G by monotone interpolation on the cached grid."""
        return np.interp(u, self._cum_g, self._nodes)

    # -- derived thresholds --------------------------------------------------

    def theta_tilde(self) -> float:
        """Smallest type with v >= 0 (v increasing)."""
        if self._theta_tilde is None:
            lo, hi = self.theta_low, self.theta_high
            if self.v(hi) < 0.0:
                raise InfeasibleEnvironmentError("v < 0 on the whole type interval")
            if self.v(lo) >= 0.0:
                self._theta_tilde = lo
            else:
                for _ in range(200):
                    m = 0.5 * (lo + hi)
                    if self.v(m) >= 0.0:
                        hi = m
                    else:
                        lo = m
                    if hi - lo < 1e-12:
                        break
                self._theta_tilde = hi  # one-sided: v(theta_tilde) >= 0
        return self._theta_tilde

    def residual_value_J(self, theta_hat: float) -> float:
        """J(t) = int_t^hi v g / theta: the cost-weighted value of types above t."""
        return self.integral_vg_over_theta(theta_hat, self.theta_high)

    def theta_dagger(self) -> float:
        """Smallest threshold with J >= 0; lies in (theta_low, theta_tilde).

        J is strictly increasing below theta_tilde (J' = -v g / theta > 0
        there), so bisection on that bracket finds the unique root.
        """
        if self._theta_dagger is None:
            tt = self.theta_tilde()
            lo = self.theta_low + 1e-12
            if self.residual_value_J(lo) >= 0.0:
                raise OutOfScopeEnvironmentError(
                    "J(theta_low) >= 0: prior not pessimistic in the 1/theta-weighted sense"
                )
            hi = tt
            for _ in range(200):
                m = 0.5 * (lo + hi)
                if self.residual_value_J(m) >= 0.0:
                    hi = m
                else:
                    lo = m
                if hi - lo < 1e-12:
                    break
            self._theta_dagger = hi  # one-sided: J(theta_dagger) >= 0
        return self._theta_dagger

    def ratio_R(self, theta_hat: float) -> float:
        """R(t) = (int_t^hi v g/theta) / (int_lo^t v g); denominator < 0 under
        a pessimistic prior."""
        if theta_hat <= self.theta_low:
            raise ValueError("ratio_R undefined at or below theta_low (zero denominator)")
        if theta_hat > self.theta_high:
            raise ValueError(f"theta_hat {theta_hat} above theta_high")
        den = self.integral_vg(self.theta_low, theta_hat)
        if den == 0.0:
            raise ValueError(f"ratio_R denominator vanishes at theta_hat={theta_hat}")
        return self.integral_vg_over_theta(theta_hat, self.theta_high) / den

    def ratio_R_prime(self, theta_hat: float) -> float:
        """Analytic derivative of R: R' = -v g (1/t + R) / int_lo^t v g."""
        den = self.integral_vg(self.theta_low, theta_hat)
        r = self.ratio_R(theta_hat)
        return -self.v(theta_hat) * self.g(theta_hat) * (1.0 / theta_hat + r) / den

    def mean_v(self) -> float:
        """Ex ante principal payoff from blanket approval, E[v]."""
        return self.integral_vg(self.theta_low, self.theta_high)

    def validate(self) -> "EnvironmentReport":
        checks: list[CheckResult] = []
        ts = np.linspace(self.theta_low, self.theta_high, 2001)

        gs = np.array([self.g(float(t)) for t in ts])
        bad = ts[gs <= 0.0]
        checks.append(
            CheckResult(
                "g_positive",
                bad.size == 0,
                "" if bad.size == 0 else f"g <= 0 at theta={bad[0]:g}",
            )
        )
        mass = self._cum_g[-1]
        checks.append(CheckResult("g_unit_mass", abs(mass - 1.0) < 1e-8, f"integral {mass:.12f}"))

        vs = np.array([self.v(float(t)) for t in ts])
        mono = bool(np.all(np.diff(vs) >= -1e-12))
        checks.append(CheckResult("v_weakly_increasing", mono))

        ev = self.mean_v()
        checks.append(CheckResult("pessimistic_prior", ev <= 1e-12, f"E[v] = {ev:.6g}"))

        try:
            tt = self.theta_tilde()
            good_mass = self.cdf_g(self.theta_high) - self.cdf_g(tt)
            ev_good = self.integral_vg(tt, self.theta_high) / good_mass if good_mass > 0 else -1.0
            checks.append(
                CheckResult("good_types_valuable", ev_good > 0.0, f"E[v|good] = {ev_good:.6g}")
            )
        except InfeasibleEnvironmentError as exc:
            checks.append(CheckResult("good_types_valuable", False, str(exc)))

        return EnvironmentReport(tuple(checks), e_v=ev)


@dataclass(frozen=True)
class EnvironmentReport:
    checks: tuple[CheckResult, ...]
    e_v: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [
            f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else "")
            for c in self.checks
        ]
