"""Signal-noise primitives: symmetric log-concave densities and their inverses.

The screening signal is s = e + sigma * eps where eps has a symmetric,
log-concave density f with unbounded support and strictly diminishing bad
luck (f increasing on the negative axis).  Everything downstream consumes
eps only through the primitives collected here: f, F, f', log f, the
upper-branch inverse density, the hazard-like scale b(p) = -p / f'(f^-1(p)),
and the tail-regularity ratio f f'' / (f')^2.

Two inverse-density conventions coexist and are both deliberate:
f^-1(0) = +inf (the density never reaches 0 at finite z) and f^-1(p) = 0
for p above the peak f(0).  Callers route between them: agent effort uses
the 0-above-peak convention, the principal's standard treats an above-peak
argument as an error.  +inf is carried as an IEEE infinity, never as a
finite sentinel.

Densities are evaluated through log space beyond 30 standard units so that
precision sweeps can reach scales where f(rho * tau) underflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_LN2 = math.log(2.0)


class SingularPointError(ValueError):
    """Raised when a ratio of density derivatives is evaluated where f' = 0."""


def _normal_log_pdf(z: float) -> float:
    return -0.5 * z * z - _LOG_SQRT_2PI


def _normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _normal_cdf(z: float) -> float:
    # erfc keeps relative accuracy deep in the lower tail.
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def _normal_dpdf(z: float) -> float:
    return -z * _normal_pdf(z)


def _laplace_log_pdf(z: float) -> float:
    return -abs(z) - _LN2


def _laplace_pdf(z: float) -> float:
    return 0.5 * math.exp(-abs(z))


def _laplace_cdf(z: float) -> float:
    if z < 0.0:
        return 0.5 * math.exp(z)
    return 1.0 - 0.5 * math.exp(-z)


def _laplace_dpdf(z: float) -> float:
    if z == 0.0:
        # f is not differentiable at 0; 0 is the symmetric completion and no
        # in-scope formula evaluates f' exactly at the peak.
        return 0.0
    return -math.copysign(1.0, z) * _laplace_pdf(z)


@dataclass(frozen=True)
class NoiseModel:
    """Immutable bundle of density-level callables for one noise family.

    All operations are pure; instances are safe to share across threads.
    """

    family: str
    _pdf: Callable[[float], float]
    _cdf: Callable[[float], float]
    _dpdf: Callable[[float], float]
    _log_pdf: Callable[[float], float]
    # Analytic upper-branch inverse taking log p; None means bisection fallback.
    _inv_from_log: Optional[Callable[[float], float]] = None
    # log-derivative pair (d/dz log f, d^2/dz^2 log f); None means numeric.
    _log_derivs: Optional[Callable[[float], tuple[float, float]]] = None
    peak: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "peak", float(self._pdf(0.0)))

    # -- constructors ------------------------------------------------------

    @classmethod
    def normal(cls) -> "NoiseModel":
        return cls(
            family="normal",
            _pdf=_normal_pdf,
            _cdf=_normal_cdf,
            _dpdf=_normal_dpdf,
            _log_pdf=_normal_log_pdf,
            _inv_from_log=lambda lp: math.sqrt(max(-2.0 * lp - 2.0 * _LOG_SQRT_2PI, 0.0)),
            _log_derivs=lambda z: (-z, -1.0),
        )

    @classmethod
    def laplace(cls) -> "NoiseModel":
        def inv_from_log(lp: float) -> float:
            return max(-(lp + _LN2), 0.0)

        def log_derivs(z: float) -> tuple[float, float]:
            if z == 0.0:
                raise SingularPointError("laplace density is not differentiable at 0")
            return (-math.copysign(1.0, z), 0.0)

        return cls(
            family="laplace",
            _pdf=_laplace_pdf,
            _cdf=_laplace_cdf,
            _dpdf=_laplace_dpdf,
            _log_pdf=_laplace_log_pdf,
            _inv_from_log=inv_from_log,
            _log_derivs=log_derivs,
        )

    @classmethod
    def custom(
        cls,
        pdf: Callable[[float], float],
        cdf: Callable[[float], float],
        dpdf: Callable[[float], float],
        log_pdf: Optional[Callable[[float], float]] = None,
        family: str = "custom",
    ) -> "NoiseModel":
        if log_pdf is None:
            log_pdf = lambda z: math.log(pdf(z))  # noqa: E731
        return cls(
            family=family,
            _pdf=pdf,
            _cdf=cdf,
            _dpdf=dpdf,
            _log_pdf=log_pdf,
        )

    # -- density primitives ------------------------------------------------

    def pdf(self, z: float) -> float:
        """Density f(z); routed through log space far from the origin."""
        if abs(z) > 30.0:
            return math.exp(self._log_pdf(z))
        return self._pdf(z)

    def log_pdf(self, z: float) -> float:
        return self._log_pdf(z)

    def cdf(self, z: float) -> float:
        """Probability F(z); short-circuits on infinite arguments."""
        if math.isinf(z):
            return 0.0 if z < 0 else 1.0
        return self._cdf(z)

    def dpdf(self, z: float) -> float:
        return self._dpdf(z)

    def inv_pdf_upper(self, p: float) -> float:
        """Nonnegative root of f(z) = p.

        Applies both boundary conventions: +inf at p = 0 and 0 at p >= f(0).
        """
        if p < 0.0:
            raise ValueError(f"density must be nonnegative, got {p}")
        if p == 0.0:
            return math.inf
        if p >= self.peak:
            return 0.0
        return self.inv_pdf_upper_log(math.log(p))

    def inv_pdf_upper_log(self, log_p: float) -> float:
        """Upper-branch inverse from log p; usable where p itself underflows."""
        if log_p == -math.inf:
            return math.inf
        if log_p >= math.log(self.peak):
            return 0.0
        if self._inv_from_log is not None:
            return self._inv_from_log(log_p)
        return self._inv_bisect(log_p)

    def _inv_bisect(self, log_p: float) -> float:
        # Monotone-safe bisection on [0, z_max] with f(z_max) < 1e-300.
        lo, hi = 0.0, 1.0
        for _ in range(2000):
            if self._log_pdf(hi) < min(log_p - 1.0, math.log(1e-300)):
                break
            hi *= 2.0
        else:
            raise ValueError("could not bracket inverse density")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self._log_pdf(mid) > log_p:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-12:
                break
        return 0.5 * (lo + hi)

    def b(self, p: float) -> float:
        """Inverse log-density slope -p / f'(f^-1(p)), for p in (0, f(0))."""
        if not 0.0 < p < self.peak:
            raise ValueError(f"b(p) requires p in (0, f(0)); got {p}")
        z = self.inv_pdf_upper(p)
        d = self._dpdf(z)
        if d == 0.0:
            raise SingularPointError(f"f'({z}) = 0")
        return -p / d

    def tail_regularity(self, z: float) -> float:
        """Ratio f(z) f''(z) / f'(z)^2, computed from log-derivatives.

        Equals ((log f)'' + ((log f)')^2) / ((log f)')^2, which stays finite
        where f itself underflows.
        """
        lp, lpp = self._log_derivatives(z)
        if lp == 0.0:
            raise SingularPointError(f"f'({z}) = 0")
        return (lpp + lp * lp) / (lp * lp)

    def _log_derivatives(self, z: float) -> tuple[float, float]:
        if self._log_derivs is not None:
            return self._log_derivs(z)
        f = self._pdf(z)
        if f <= 0.0:
            raise SingularPointError(f"f({z}) = 0")
        lp = self._dpdf(z) / f
        h = 1e-5 * max(1.0, abs(z))
        lp_hi = self._dpdf(z + h) / self._pdf(z + h)
        lp_lo = self._dpdf(z - h) / self._pdf(z - h)
        return lp, (lp_hi - lp_lo) / (2.0 * h)


def make_noise(family: str) -> NoiseModel:
    """Construct a built-in noise family from its config tag."""
    if family == "normal":
        return NoiseModel.normal()
    if family == "laplace":
        return NoiseModel.laplace()
    raise ValueError(f"unknown noise family {family!r} (expected normal or laplace)")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class NoiseReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [
            f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else "")
            for c in self.checks
        ]


def validate_noise(model: NoiseModel, grid_points: int = 2001, z_max: float = 12.0) -> NoiseReport:
    """Mechanically check the standing assumptions on the noise density.

    Reports one pass/fail entry per invariant, with the offending grid point
    on failure.  Built-in families pass by construction; the checks exist for
    user-supplied custom densities.
    """
    import numpy as np
    from scipy import integrate

    checks: list[CheckResult] = []
    zs = np.linspace(-z_max, z_max, grid_points)

    # Symmetry f(z) = f(-z).
    worst, worst_z = 0.0, 0.0
    for z in zs[zs >= 0]:
        a, bb = model.pdf(float(z)), model.pdf(float(-z))
        err = abs(a - bb) / max(a, 1e-300)
        if err > worst:
            worst, worst_z = err, float(z)
    checks.append(CheckResult("symmetry", worst < 1e-9, f"max rel err {worst:.2e} at z={worst_z:g}"))

    # Unit mass and zero mean.
    mass, _ = integrate.quad(model.pdf, -math.inf, math.inf, limit=200)
    mean, _ = integrate.quad(lambda z: z * model.pdf(z), -math.inf, math.inf, limit=200)
    checks.append(CheckResult("unit_mass", abs(mass - 1.0) < 1e-6, f"integral {mass:.12f}"))
    checks.append(CheckResult("zero_mean", abs(mean) < 1e-6, f"mean {mean:.2e}"))

    # Log-concavity: f'/f non-increasing.
    ok, bad_z = True, None
    prev = None
    for z in zs:
        f = model.pdf(float(z))
        if f <= 0.0:
            continue
        try:
            slope = model.dpdf(float(z)) / f
        except SingularPointError:
            continue
        if prev is not None and slope > prev + 1e-9:
            ok, bad_z = False, float(z)
            break
        prev = slope
    checks.append(
        CheckResult("log_concavity", ok, "" if ok else f"f'/f increases at z={bad_z:g}")
    )

    # Strictly diminishing bad luck: f strictly increasing on z < 0.
    ok, bad_z = True, None
    neg = zs[zs < 0]
    for z0, z1 in zip(neg[:-1], neg[1:]):
        if model.pdf(float(z0)) > 0.0 and model.pdf(float(z0)) >= model.pdf(float(z1)):
            ok, bad_z = False, float(z0)
            break
    checks.append(
        CheckResult("diminishing_bad_luck", ok, "" if ok else f"f not increasing at z={bad_z:g}")
    )

    # Inverse consistency on a p-grid, plus both boundary conventions.
    ok, detail = True, ""
    ps = np.geomspace(1e-10, model.peak * (1 - 1e-9), 200)
    prev_z = math.inf
    for p in ps:
        z = model.inv_pdf_upper(float(p))
        if not z <= prev_z:
            ok, detail = False, f"f^-1 not decreasing at p={p:.3e}"
            break
        prev_z = z
        if abs(model.pdf(z) - p) > 1e-10 * max(p, 1e-12):
            ok, detail = False, f"f(f^-1(p)) != p at p={p:.3e}"
            break
    if ok and model.inv_pdf_upper(0.0) != math.inf:
        ok, detail = False, "f^-1(0) != +inf"
    if ok and model.inv_pdf_upper(model.peak * 1.5) != 0.0:
        ok, detail = False, "f^-1(p) != 0 above the peak"
    checks.append(CheckResult("inverse_consistency", ok, detail))

    return NoiseReport(tuple(checks))
