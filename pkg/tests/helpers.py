"""Shared fixtures and random-model generators for the test suite."""
from __future__ import annotations

import numpy as np

from statarb.gbm import embedded_q
from statarb.lattice import TrendLattice, TrinomialTopModel, TwoPeriodBinomial


def find_no_sa_mu(c: float, sigma: float) -> float:
    """Bisect the drift at which the embedded grid ratio q crosses 1.

    The grid's log-asymmetry pushes q below 1 at small nu = mu/sigma^2 - 1/2
    while strong drift pushes it above, so a root exists in between.
    """

    def gap(nu: float) -> float:
        return embedded_q(c, (nu + 0.5) * sigma**2, sigma) - 1.0

    lo, hi = 0.0, 2.0
    assert gap(lo) < 0 < gap(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (0.5 * (lo + hi) + 0.5) * sigma**2


def sec34_binomial() -> TwoPeriodBinomial:
    """The worked +-5 example: every increment is +-5 and q = 0.3/0.25 = 1.2."""
    return TwoPeriodBinomial(100.0, 105.0, 95.0, 110.0, 100.0, 90.0,
                             (0.225, 0.3, 0.25, 0.225))


def counterexample_trinomial() -> TrinomialTopModel:
    """The trinomial fixture with the shared top state at 14."""
    return TrinomialTopModel(10.0, 12.0, 8.0, 14.0, 13.0, 10.0, 6.0,
                             (0.15, 0.2, 0.3, 0.05, 0.1, 0.2))


def random_probs(rng: np.random.Generator, n: int) -> tuple[float, ...]:
    """Strictly positive probabilities bounded away from zero, summing to 1."""
    raw = 0.05 + rng.random(n)
    return tuple(raw / raw.sum())


def random_binomial(rng: np.random.Generator,
                    p: tuple[float, ...] | None = None) -> TwoPeriodBinomial:
    """A non-degenerate two-period binomial model with comfortable margins."""
    s0 = float(rng.uniform(20.0, 2000.0))
    up = float(rng.uniform(0.02, 0.3))
    down = float(rng.uniform(0.02, 0.3))
    s_up = s0 * (1.0 + up)
    s_down = s0 * (1.0 - down)
    s_uu = s_up * (1.0 + rng.uniform(0.02, 0.3))
    s_ud = float(s_down + (s_up - s_down) * rng.uniform(0.1, 0.9))
    s_dd = s_down * (1.0 - rng.uniform(0.02, 0.3))
    if p is None:
        p = random_probs(rng, 4)
    return TwoPeriodBinomial(s0, s_up, s_down, s_uu, s_ud, s_dd, p)


def random_trinomial(rng: np.random.Generator) -> TrinomialTopModel:
    """A non-degenerate trinomial-top model."""
    s0 = float(rng.uniform(20.0, 2000.0))
    s1_up = s0 * (1.0 + rng.uniform(0.02, 0.3))
    s1_down = s0 * (1.0 - rng.uniform(0.02, 0.3))
    s2_uu = s1_up * (1.0 + rng.uniform(0.02, 0.3))
    s2_circ = s2_uu * (1.0 + rng.uniform(0.02, 0.3))
    s2_ud = float(s1_down + (s1_up - s1_down) * rng.uniform(0.1, 0.9))
    s2_dd = s1_down * (1.0 - rng.uniform(0.02, 0.3))
    return TrinomialTopModel(s0, s1_up, s1_down, s2_circ, s2_uu, s2_ud, s2_dd,
                             random_probs(rng, 6))


def random_trend_lattice(rng: np.random.Generator, orientation: str,
                         for_dichotomy: bool = False) -> TrendLattice:
    """A non-degenerate trend lattice.  With ``for_dichotomy`` the reverse
    price stays on the start's side (<= s0 positive, >= s0 negative)."""
    s0 = float(rng.uniform(20.0, 2000.0))
    s_up = s0 * (1.0 + rng.uniform(0.02, 0.3))
    s_down = s0 * (1.0 - rng.uniform(0.02, 0.3))
    s_uu = s_up * (1.0 + rng.uniform(0.02, 0.3))
    s_ud = float(s_down + (s_up - s_down) * rng.uniform(0.1, 0.9))
    s_dd = s_down * (1.0 - rng.uniform(0.02, 0.3))
    if orientation == "positive":
        s3_continue = s_uu * (1.0 + rng.uniform(0.02, 0.3))
        hi = min(s_uu, s0) if for_dichotomy else s_uu
        s3_reverse = float(hi * rng.uniform(0.5, 0.999))
    else:
        s3_continue = s_dd * (1.0 - rng.uniform(0.02, 0.3))
        lo = max(s_dd, s0) if for_dichotomy else s_dd
        s3_reverse = float(lo * rng.uniform(1.001, 1.5))
    return TrendLattice(orientation, s0, s_up, s_down, s_uu, s_ud, s_dd,
                        s3_continue, s3_reverse, random_probs(rng, 5))


def grid_binomial(s0: float, c: float, q: float) -> TwoPeriodBinomial:
    """Two-period binomial on the multiplicative barrier grid s0(1 +- kc)
    with the middle-path probability ratio equal to ``q``.

    The middle weights are q/16 and 1/16 so that p[1]/p[2] reproduces ``q``
    bit-for-bit (scaling by a power of two is exact); requires q < 15.
    """
    t = 0.0625
    rest = (1.0 - (1.0 + q) * t) / 2.0
    p = (rest, q * t, t, rest)
    return TwoPeriodBinomial(s0, s0 * (1 + c), s0 * (1 - c),
                             s0 * (1 + 2 * c), s0, s0 * (1 - 2 * c), p)


def random_exact_grid(rng: np.random.Generator,
                      q_gap: float = 1e-3) -> tuple[float, float, float]:
    """Random (s0, c, q) whose multiplicative grid prices and increments are
    exactly representable: integral s0 and dyadic c keep every product below
    53 significand bits, so cross-route comparisons see identical inputs.
    q is kept ``q_gap`` away from the no-strategy point 1."""
    s0 = float(rng.integers(8, 4097))
    c = float(rng.integers(41, 1024)) / 4096.0
    while True:
        q = float(rng.uniform(0.3, 3.0))
        if abs(q - 1.0) >= q_gap:
            return s0, c, q


def grid_trend_lattice(s0: float, c: float, orientation: str,
                       q: float = 1.2) -> TrendLattice:
    """Trend lattice on the multiplicative barrier grid: third leg runs from
    s0(1+2c) to {s0(1+4c), s0} (positive) or from s0(1-2c) to
    {s0(1-4c), s0} (negative)."""
    t = 0.0625
    rest = (1.0 - (1.0 + q) * t) / 3.0
    p = (rest, q * t, t, rest, rest)
    if orientation == "positive":
        return TrendLattice(orientation, s0, s0 * (1 + c), s0 * (1 - c),
                            s0 * (1 + 2 * c), s0, s0 * (1 - 2 * c),
                            s0 * (1 + 4 * c), s0, p)
    return TrendLattice(orientation, s0, s0 * (1 + c), s0 * (1 - c),
                        s0 * (1 + 2 * c), s0, s0 * (1 - 2 * c),
                        s0 * (1 - 4 * c), s0, p)
