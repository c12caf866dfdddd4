"""Closed-form geometric-Brownian-motion quantities.

Exit probabilities for two-sided barriers, the probability ratio q of the
binomial model embedded at barrier hitting times, the closed-form embedded
strategy, and maximum-likelihood drift/volatility estimation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeries, InvalidInterval, NoSaExists
from .lattice import EPS_TOL, StrategyVector

# switch to the nu -> 0 limit of the exit-probability formula below this
NU_EPS = 1e-9

__all__ = [
    "NU_EPS",
    "GbmParams",
    "BarrierGrid",
    "exit_prob_lower",
    "exit_prob_upper",
    "embedded_q",
    "embedded_phi",
    "mle_estimate",
]


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GbmParams:
    """Parameters of dS = mu*S dt + sigma*S dB on [0, horizon].

    `n_steps` is the number of equally spaced observation intervals.
    """

    mu: float
    sigma: float
    s0: float
    horizon: float
    n_steps: int

    def __post_init__(self) -> None:
        if not (self.sigma > 0):
            raise ValueError("sigma must be positive")
        if not (self.s0 > 0):
            raise ValueError("s0 must be positive")
        if not (self.horizon > 0):
            raise ValueError("horizon must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")

    @property
    def eta(self) -> float:
        """Drift-to-volatility fraction mu/sigma."""
        return self.mu / self.sigma

    @property
    def dt(self) -> float:
        """Years per observation interval."""
        return self.horizon / self.n_steps


@dataclass(frozen=True)
class BarrierGrid:
    """Multiplicative barrier levels anchor*(1 + k*c) around an anchor price.

    c < 1/2 keeps the two-steps-down level anchor*(1 - 2c) positive.
    """

    anchor: float
    c: float

    def __post_init__(self) -> None:
        if not (self.anchor > 0):
            raise ValueError("anchor must be positive")
        if not (0 < self.c < 0.5):
            raise ValueError("c must lie in (0, 1/2)")

    def level(self, k: int) -> float:
        """Barrier price k relative steps away from the anchor."""
        return self.anchor * (1.0 + k * self.c)


# ---------------------------------------------------------------------------
# exit probabilities
# ---------------------------------------------------------------------------


def _logsinh(x: float) -> float:
    """log(sinh(x)) for x > 0, stable for both tiny and large x."""
    return x + math.log(-math.expm1(-2.0 * x)) - math.log(2.0)


def _check_interval(s0: float, a: float, b: float, sigma: float) -> None:
    if not (sigma > 0):
        raise ValueError("sigma must be positive")
    if not (0 < a <= s0 <= b) or a >= b:
        raise InvalidInterval(f"require 0 < a <= s0 <= b, got "
                              f"a={a}, s0={s0}, b={b}")


def exit_prob_lower(s0: float, a: float, b: float, mu: float,
                    sigma: float) -> float:
    """Probability that GBM started at s0 leaves (a, b) through a.

    With nu = mu/sigma^2 - 1/2 and log-barriers A = ln(a/s0) < 0 < B =
    ln(b/s0) the probability is exp(nu*A) * sinh(|nu|B) / sinh(|nu|(B-A)),
    evaluated in log space; for |nu| <= NU_EPS the driftless limit
    B / (B - A) = ln(b/s0)/ln(b/a) is used.
    """
    _check_interval(s0, a, b, sigma)
    if a == s0:
        return 1.0
    if b == s0:
        return 0.0
    nu = mu / (sigma * sigma) - 0.5
    big_a = math.log(a / s0)
    big_b = math.log(b / s0)
    if abs(nu) <= NU_EPS:
        p = big_b / (big_b - big_a)
    else:
        w = abs(nu)
        p = math.exp(nu * big_a + _logsinh(w * big_b)
                     - _logsinh(w * (big_b - big_a)))
    return min(1.0, max(0.0, p))


def exit_prob_upper(s0: float, a: float, b: float, mu: float,
                    sigma: float) -> float:
    """Probability that GBM started at s0 leaves (a, b) through b.

    Mirror of exit_prob_lower (1/S is GBM with drift sigma^2 - mu and the
    barriers swap roles): exp(nu*B) * sinh(|nu||A|) / sinh(|nu|(B-A)).
    Evaluating it directly instead of as 1 - exit_prob_lower keeps full
    precision when the complement is within rounding of 1.
    """
    _check_interval(s0, a, b, sigma)
    if a == s0:
        return 0.0
    if b == s0:
        return 1.0
    nu = mu / (sigma * sigma) - 0.5
    big_a = math.log(a / s0)
    big_b = math.log(b / s0)
    if abs(nu) <= NU_EPS:
        p = -big_a / (big_b - big_a)
    else:
        w = abs(nu)
        p = math.exp(nu * big_b + _logsinh(-w * big_a)
                     - _logsinh(w * (big_b - big_a)))
    return min(1.0, max(0.0, p))


# ---------------------------------------------------------------------------
# embedded binomial model
# ---------------------------------------------------------------------------


def embedded_q(c: float, mu: float, sigma: float) -> float:
    """Probability ratio q = P(up-then-back) / P(down-then-back) of the
    binomial model embedded at hitting times of the levels s0*(1 +- c).

    The first step resolves at the barriers s0*(1 +- c); conditional on its
    outcome the second step resolves at (s0, s0*(1+2c)) respectively
    (s0*(1-2c), s0).  The anchor price cancels, so everything is computed
    on the normalized grid around 1.
    """
    if not (0 < c < 0.5):
        raise ValueError("c must lie in (0, 1/2)")
    p_down1 = exit_prob_lower(1.0, 1.0 - c, 1.0 + c, mu, sigma)
    p_up1 = exit_prob_upper(1.0, 1.0 - c, 1.0 + c, mu, sigma)
    p_mid_up = exit_prob_lower(1.0 + c, 1.0, 1.0 + 2.0 * c, mu, sigma)
    p_mid_down = exit_prob_upper(1.0 - c, 1.0 - 2.0 * c, 1.0, mu, sigma)
    return (p_up1 * p_mid_up) / (p_down1 * p_mid_down)


def embedded_phi(c: float, s0_anchor: float, q: float) -> StrategyVector:
    """Closed-form zero-cost strategy for the embedded binomial model.

    On the multiplicative grid the increments collapse to +-c*s0 steps and
    the general solver reduces to

        phi1 = (2+q)(c s0)^2 / D,  phi2+ = (q-4)(c s0)^2 / D,
        phi2- = -3q(c s0)^2 / D,   D = 2(q-1)(c s0)^3.

    Raises NoSaExists when q is (numerically) 1, where no such strategy
    exists.
    """
    if not (0 < c < 0.5):
        raise ValueError("c must lie in (0, 1/2)")
    if not (s0_anchor > 0):
        raise ValueError("s0_anchor must be positive")
    if abs(q - 1.0) <= EPS_TOL:
        raise NoSaExists(f"embedded model admits no strategy at q={q!r}")
    step = c * s0_anchor
    d = 2.0 * (q - 1.0) * step ** 3
    s2 = step * step
    return StrategyVector((2.0 + q) * s2 / d, (q - 4.0) * s2 / d,
                          -3.0 * q * s2 / d)


# ---------------------------------------------------------------------------
# parameter estimation
# ---------------------------------------------------------------------------


def mle_estimate(closes: np.ndarray, dt: float) -> tuple[float, float]:
    """Maximum-likelihood (mu, sigma) from a price series sampled every dt
    years.

    With log-returns r: sigma^2 = Var(r)/dt (n-1 denominator) and
    mu = mean(r)/dt + sigma^2/2.  A series shorter than 30 observations or
    with (numerically) zero return variance raises DegenerateSeries.
    """
    prices = np.asarray(closes, dtype=float)
    if prices.ndim != 1 or prices.size < 30:
        raise DegenerateSeries("need at least 30 observations")
    if not (dt > 0):
        raise ValueError("dt must be positive")
    if np.any(prices <= 0):
        raise ValueError("prices must be positive")
    r = np.diff(np.log(prices))
    var = float(np.var(r, ddof=1))
    if var <= 1e-24:
        raise DegenerateSeries("return variance is zero")
    sigma_sq = var / dt
    mu = float(np.mean(r)) / dt + sigma_sq / 2.0
    return mu, math.sqrt(sigma_sq)
