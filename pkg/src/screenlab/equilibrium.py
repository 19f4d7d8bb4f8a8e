"""Best responses and the semi-separating equilibrium of the screening game.

For noise scale sigma (= 1/precision) the two sides' conditions are

  agent:     Q(th, ta) = F(f^-1(sigma/th)) - [ta + f^-1(sigma/th)] sigma/th
                         - F(-ta) = 0
             (indifference of the threshold type between zero effort and the
             interior optimum; ta is the precision-adjusted standard tau/sigma),
  principal: f(ta) = -sigma R(th)
             (indifference between approving and rejecting at the standard).

Q is strictly increasing in th, the principal curve ta = f^-1(-sigma R(th))
is strictly decreasing on (theta_dagger, theta_tilde), and along it
dQ/dta = -sigma (1/th + R(th)) < 0, so the composite

    Phi(ta) = Q(Tinv(ta), ta),   Tinv = inverse of the principal curve,

is strictly decreasing in ta and its unique root is the equilibrium.  The
solver bisects Phi in ta rather than the fixed-point map in th: at high
precision the equilibrium threshold sits within exp(-O(1/sigma^2)) of
theta_dagger, far below float spacing, while ta stays an O(theta/sigma)
number.  Tinv is evaluated through log(-R), with a first-order expansion of
R around theta_dagger once the gap drops below the integral table's
resolution, and the threshold's distance from theta_dagger is carried in
log form (theta_hat_gap_log) so comparative statics stay resolvable after
theta_hat itself rounds to theta_dagger.

A semi-separating equilibrium exists iff Phi >= 0 at ta = T(theta_tilde),
equivalently sigma <= sigma_tilde; sigma_tilde is the root, in sigma, of
that boundary condition.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .environment import Environment
from .noise import NoiseModel


class UndefinedStandardError(ValueError):
    """Principal standard requested where R > 0 (no interior indifference)."""


class NoiseTooLargeError(ValueError):
    """-sigma R(theta_hat) exceeds the peak density f(0)."""


class ThresholdNotFoundError(RuntimeError):
    """No sign change found when scanning for sigma_tilde."""


class SolverInconsistencyError(RuntimeError):
    """A bracket that theory guarantees failed to materialize."""


@dataclass(frozen=True)
class Equilibrium:
    """A solved outcome at one noise scale.

    Pooling is tagged kind='pooling' with tau = tau_hat = +inf and
    theta_hat = theta_high.  For semi-separating outcomes theta_hat_gap_log
    is log(theta_hat - theta_dagger), which stays meaningful after the gap
    itself underflows.
    """

    sigma: float
    rho: float
    kind: str  # "semi-separating" | "pooling"
    tau: float
    tau_hat: float
    theta_hat: float
    theta_hat_gap_log: float
    q_residual: float
    pbr_residual: float

    @property
    def is_pooling(self) -> bool:
        return self.kind == "pooling"


class ScreeningGame:
    """Pure solver bundle for one (noise, environment) pair.

    All methods are pure functions of their arguments plus the immutable
    members; independent sigma points may be solved concurrently.
    """

    def __init__(self, noise: NoiseModel, env: Environment, solver_tol: float = 1e-10) -> None:
        self.noise = noise
        self.env = env
        self.solver_tol = float(solver_tol)
        self._sigma_tilde: Optional[float] = None

    # -- agent side ----------------------------------------------------------

    def optimal_positive_effort(self, theta: float, tau: float, sigma: float) -> float:
        """Effort of a participating type: max(tau + sigma f^-1(sigma/theta), 0).

        Uses the 0-above-peak inverse convention, so the candidate degrades to
        tau when sigma/theta exceeds f(0).
        """
        z = self.noise.inv_pdf_upper(sigma / theta)
        return max(tau + sigma * z, 0.0)

    def agent_indifference_Q(self, theta_hat: float, tau_hat: float, sigma: float) -> float:
        """Gap between positive-effort and zero-effort payoffs for the type
        theta_hat facing adjusted standard tau_hat (valid for tau_hat >= 0)."""
        x = self.noise.inv_pdf_upper(sigma / theta_hat)
        return (
            self.noise.cdf(x)
            - (tau_hat + x) * sigma / theta_hat
            - self.noise.cdf(-tau_hat)
        )

    def agent_threshold(self, tau_hat: float, sigma: float) -> float:
        """Threshold type Theta_hat(tau_hat): types above it exert positive
        effort, types below exert zero.  Corners at the interval ends are
        legitimate outputs."""
        lo, hi = self.env.theta_low, self.env.theta_high
        if math.isinf(tau_hat) and tau_hat > 0:
            return hi
        if tau_hat < 0.0:
            # Below a zero standard the comparison degenerates: participate
            # iff the interior candidate clears zero effort.
            return min(max(sigma / self.noise.pdf(-tau_hat), lo), hi)
        if self.agent_indifference_Q(lo, tau_hat, sigma) >= 0.0:
            return lo
        if self.agent_indifference_Q(hi, tau_hat, sigma) <= 0.0:
            return hi
        a, b = lo, hi  # Q(a) < 0 < Q(b); Q strictly increasing in theta
        for _ in range(200):
            m = 0.5 * (a + b)
            if self.agent_indifference_Q(m, tau_hat, sigma) < 0.0:
                a = m
            else:
                b = m
            if b - a < self.solver_tol:
                break
        return 0.5 * (a + b)

    # -- principal side --------------------------------------------------------

    def principal_standard(self, theta_hat: float, sigma: float) -> float:
        """Adjusted standard T_hat(theta_hat) = f^-1(-sigma R(theta_hat)).

        +inf at theta_hat = theta_dagger (where R = 0); errors if R > 0 or
        the argument overshoots the peak density.
        """
        r = self.env.ratio_R(theta_hat)
        if r > 0.0:
            raise UndefinedStandardError(f"R({theta_hat}) = {r} > 0: no interior standard")
        p = -sigma * r
        if p > self.noise.peak:
            raise NoiseTooLargeError(
                f"-sigma R = {p} exceeds f(0) = {self.noise.peak}; noise too large"
            )
        return self.noise.inv_pdf_upper(p)

    def _log_minus_R(self, gap: float) -> float:
        """log(-R(theta_dagger + gap)) on the decreasing branch, switching to a
        first-order expansion once the gap is below the table's resolution."""
        td = self.env.theta_dagger()
        tt = self.env.theta_tilde()
        switch = 1e-8 * (tt - td)
        if gap <= switch:
            return math.log(-self._r_prime_dagger()) + math.log(gap)
        return math.log(-self.env.ratio_R(td + gap))

    def _r_prime_dagger(self) -> float:
        if not hasattr(self, "_rpd"):
            self._rpd = self.env.ratio_R_prime(self.env.theta_dagger())
        return self._rpd

    def principal_standard_inverse(self, tau_hat: float, sigma: float) -> tuple[float, float]:
        """Invert the principal curve: the theta_hat in (theta_dagger,
        theta_tilde] whose standard is tau_hat.

        Returns (theta_hat, log(theta_hat - theta_dagger)); the log gap stays
        exact after the absolute gap underflows.
        """
        td = self.env.theta_dagger()
        tt = self.env.theta_tilde()
        target = self.noise.log_pdf(tau_hat) - math.log(sigma)  # = log(-R(theta_hat))
        top = tt - td
        if target >= self._log_minus_R(top):
            return tt, math.log(top)
        switch = 1e-8 * top
        taylor = target - math.log(-self._r_prime_dagger())
        if taylor <= math.log(switch):
            # Gap below table resolution: R is linear to double precision.
            return td + math.exp(taylor), taylor
        s_lo, s_hi = math.log(0.5 * switch), math.log(top)
        for _ in range(200):
            s = 0.5 * (s_lo + s_hi)
            if self._log_minus_R(math.exp(s)) < target:
                s_lo = s
            else:
                s_hi = s
            if s_hi - s_lo < 1e-13:
                break
        s = 0.5 * (s_lo + s_hi)
        return td + math.exp(s), s

    # -- equilibrium -----------------------------------------------------------

    def _phi(self, tau_hat: float, sigma: float) -> float:
        th, _ = self.principal_standard_inverse(tau_hat, sigma)
        return self.agent_indifference_Q(th, tau_hat, sigma)

    def _existence_margin(self, sigma: float) -> float:
        """Phi at the left end of the bracket; >= 0 iff a semi-separating
        equilibrium exists (sigma <= sigma_tilde)."""
        tt = self.env.theta_tilde()
        p = -sigma * self.env.ratio_R(tt)
        if p > self.noise.peak:
            return -math.inf
        tau_left = self.noise.inv_pdf_upper(p)
        return self.agent_indifference_Q(tt, tau_left, sigma)

    def solve_semiseparating(self, sigma: float) -> Optional[Equilibrium]:
        """The unique semi-separating equilibrium at noise scale sigma, or
        None when only pooling survives (sigma > sigma_tilde)."""
        if sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        tt = self.env.theta_tilde()
        td = self.env.theta_dagger()
        margin = self._existence_margin(sigma)
        if margin < 0.0:
            if margin > -1e-9:
                # Knife-edge at sigma_tilde: accept the boundary solution.
                return self._finish(tt, math.log(tt - td), self.principal_standard(tt, sigma), sigma)
            return None
        p_tt = -sigma * self.env.ratio_R(tt)
        ta_lo = self.noise.inv_pdf_upper(p_tt)  # Phi(ta_lo) = margin >= 0
        ta_hi = max(2.0 * ta_lo, 1.0)
        for _ in range(200):
            if self._phi(ta_hi, sigma) < 0.0:
                break
            ta_hi *= 2.0
        else:
            raise SolverInconsistencyError("no upper bracket for the adjusted standard")
        # Near sigma_tilde the inverse principal curve has unbounded slope at
        # theta_tilde, so a fixed width tolerance leaves an O(1e-6) residual;
        # keep halving until the residual itself is small.
        phi_mid = math.inf
        for _ in range(200):
            m = 0.5 * (ta_lo + ta_hi)
            phi_mid = self._phi(m, sigma)
            if phi_mid >= 0.0:
                ta_lo = m
            else:
                ta_hi = m
            width = ta_hi - ta_lo
            if width < self.solver_tol * max(1.0, ta_hi) and abs(phi_mid) < 1e-10:
                break
            if width < 8.0 * math.ulp(max(1.0, ta_hi)):
                break
        tau_hat = 0.5 * (ta_lo + ta_hi)
        theta_hat, gap_log = self.principal_standard_inverse(tau_hat, sigma)
        return self._finish(theta_hat, gap_log, tau_hat, sigma)

    def _finish(self, theta_hat: float, gap_log: float, tau_hat: float, sigma: float) -> Equilibrium:
        q_res = self.agent_indifference_Q(theta_hat, tau_hat, sigma)
        pbr = self.noise.pdf(tau_hat) * self.env.integral_vg(
            self.env.theta_low, theta_hat
        ) + sigma * self.env.integral_vg_over_theta(theta_hat, self.env.theta_high)
        return Equilibrium(
            sigma=sigma,
            rho=1.0 / sigma,
            kind="semi-separating",
            tau=sigma * tau_hat,
            tau_hat=tau_hat,
            theta_hat=theta_hat,
            theta_hat_gap_log=gap_log,
            q_residual=q_res,
            pbr_residual=pbr,
        )

    def pooling(self, sigma: float) -> Equilibrium:
        return Equilibrium(
            sigma=sigma,
            rho=1.0 / sigma,
            kind="pooling",
            tau=math.inf,
            tau_hat=math.inf,
            theta_hat=self.env.theta_high,
            theta_hat_gap_log=math.nan,
            q_residual=0.0,
            pbr_residual=0.0,
        )

    def solve(self, sigma: float) -> Equilibrium:
        """Semi-separating equilibrium when it exists, else the pooling one."""
        eq = self.solve_semiseparating(sigma)
        return eq if eq is not None else self.pooling(sigma)

    # -- existence threshold -----------------------------------------------------

    def sigma_tilde(self) -> float:
        """Largest noise scale admitting the semi-separating equilibrium.

        Root in sigma of the boundary condition Phi(T(theta_tilde)) = 0,
        located by an ascending sign scan and bisection; returns the
        existence-side endpoint.  Multiple scan crossings are flagged.
        """
        if self._sigma_tilde is not None:
            return self._sigma_tilde
        tt = self.env.theta_tilde()
        r_tt = self.env.ratio_R(tt)
        sigma_max = 0.999 * min(tt * self.noise.peak, self.noise.peak / (-r_tt))
        grid = np.geomspace(1e-4 * sigma_max, sigma_max, 64)
        margins = [self._existence_margin(float(s)) for s in grid]
        crossings = [
            i for i in range(len(grid) - 1) if margins[i] >= 0.0 and margins[i + 1] < 0.0
        ]
        if not crossings:
            raise ThresholdNotFoundError(
                "no existence boundary found on (0, 0.999 theta_tilde f(0)]"
            )
        if len(crossings) > 1:
            warnings.warn(
                f"existence margin changes sign {len(crossings)} times; using the first",
                RuntimeWarning,
                stacklevel=2,
            )
        i = crossings[0]
        lo, hi = float(grid[i]), float(grid[i + 1])  # margin(lo) >= 0 > margin(hi)
        for _ in range(200):
            m = 0.5 * (lo + hi)
            if self._existence_margin(m) >= 0.0:
                lo = m
            else:
                hi = m
            if hi - lo < 1e-14 * hi:
                break
        self._sigma_tilde = lo
        return lo

    def existence_residual(self, sigma: float) -> float:
        """Defining-equation residual at sigma (zero at sigma_tilde)."""
        return self._existence_margin(sigma)

    # -- schedules ---------------------------------------------------------------

    def effort_schedule(self, eq: Equilibrium) -> Callable[[np.ndarray], np.ndarray]:
        """Equilibrium effort as a vectorized map theta -> e*(theta)."""
        if eq.is_pooling:
            return lambda theta: np.zeros_like(np.asarray(theta, dtype=float))
        sigma, tau, th_hat = eq.sigma, eq.tau, eq.theta_hat

        def schedule(theta):
            theta = np.asarray(theta, dtype=float)
            z = inv_pdf_upper_vec(self.noise, sigma / theta)
            e = np.maximum(tau + sigma * z, 0.0)
            return np.where(theta < th_hat, 0.0, e)

        return schedule


def inv_pdf_upper_vec(noise: NoiseModel, p) -> np.ndarray:
    """Vectorized upper-branch inverse density (closed forms for built-ins)."""
    p = np.asarray(p, dtype=float)
    if noise.family == "normal":
        with np.errstate(divide="ignore"):
            z2 = -2.0 * np.log(p) - math.log(2.0 * math.pi)
        return np.where(p >= noise.peak, 0.0, np.sqrt(np.maximum(z2, 0.0)))
    if noise.family == "laplace":
        with np.errstate(divide="ignore"):
            z = -np.log(2.0 * p)
        return np.where(p >= noise.peak, 0.0, z)
    return np.vectorize(noise.inv_pdf_upper, otypes=[float])(p)


def cdf_vec(noise: NoiseModel, z) -> np.ndarray:
    """Vectorized noise cdf (closed forms for built-ins)."""
    z = np.asarray(z, dtype=float)
    if noise.family == "normal":
        from scipy.special import ndtr

        return ndtr(z)
    if noise.family == "laplace":
        return np.where(z < 0.0, 0.5 * np.exp(z), 1.0 - 0.5 * np.exp(-z))
    return np.vectorize(noise.cdf, otypes=[float])(z)
