"""Finite lattice market models and statistical-arbitrage certificates.

Three model families are covered:

* ``TwoPeriodBinomial`` -- recombining two-period binomial tree with paths
  (uu, ud, du, dd).  Admits a complete theory: a determinant certificate for
  absence of statistical arbitrage, the unique equivalent martingale measure,
  and a closed-form strategy ``phi = A^-1 (1,1,1)`` when arbitrage exists.
* ``TrinomialTopModel`` -- a two-step tree whose second step is binomial plus
  one shared top state reachable from both period-1 nodes.  Incomplete; only a
  sufficient certificate (Gamma bounds) is available, so the certificate is
  three-valued.
* ``TrendLattice`` -- a two-period binomial extended by a third leg after two
  same-direction moves (up-up for the positive orientation, down-down for the
  negative one).  Carries the trend-following and dichotomy-scenario
  strategies with a free parameter ``alpha``.

A *statistical arbitrage* for a scenario partition is a zero-cost strategy
whose conditional expected gain is >= 0 on every cell and whose unconditional
expected gain is > 0.  Equality-like tests use the module tolerance
``EPS_TOL``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateModel, NoSaExists, NoSolution, InvalidBase

EPS_TOL = 1e-10


def _check_probs(p: tuple[float, ...], n: int) -> None:
    if len(p) != n:
        raise ValueError(f"expected {n} path probabilities, got {len(p)}")
    if any(not math.isfinite(x) or x <= 0.0 for x in p):
        raise ValueError("path probabilities must be finite and > 0")
    if abs(sum(p) - 1.0) > 1e-9:
        raise ValueError(f"path probabilities must sum to 1, got {sum(p)!r}")


# ---------------------------------------------------------------- model types


@dataclass(frozen=True)
class TwoPeriodBinomial:
    """Recombining two-period binomial model.

    Paths are indexed 0..3 = (uu, ud, du, dd); the middle terminal price
    ``s_ud`` is shared by ud and du.  ``p`` holds one probability per path.
    """

    s0: float
    s_up: float
    s_down: float
    s_uu: float
    s_ud: float
    s_dd: float
    p: tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        _check_probs(self.p, 4)
        if not (self.s_up > self.s0 > self.s_down):
            raise ValueError("need s_up > s0 > s_down")
        if not (self.s_uu > self.s_up):
            raise ValueError("need s_uu > s_up")
        if not (self.s_down < self.s_ud < self.s_up):
            raise ValueError("need s_down < s_ud < s_up")
        if not (self.s_dd < self.s_down):
            raise ValueError("need s_dd < s_down")

    n_paths = 4

    @property
    def q(self) -> float:
        """Probability ratio of the two middle paths, p(ud)/p(du)."""
        return self.p[1] / self.p[2]

    @property
    def ds1(self) -> tuple[float, ...]:
        u, d = self.s_up - self.s0, self.s_down - self.s0
        return (u, u, d, d)

    @property
    def ds2(self) -> tuple[float, ...]:
        return (
            self.s_uu - self.s_up,
            self.s_ud - self.s_up,
            self.s_ud - self.s_down,
            self.s_dd - self.s_down,
        )

    first_up = (True, True, False, False)
    ds3 = (0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class TrinomialTopModel:
    """Two-step model: binomial first step, recombining-binomial second step
    plus a shared top state reachable from both period-1 nodes.

    Paths 0..5: first move up for 0..2, down for 3..5, with terminal prices
    (s2_circ, s2_uu, s2_ud, s2_circ, s2_ud, s2_dd).
    """

    s0: float
    s1_up: float
    s1_down: float
    s2_circ: float
    s2_uu: float
    s2_ud: float
    s2_dd: float
    p: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        _check_probs(self.p, 6)
        if not (self.s2_circ > self.s2_uu > self.s2_ud > self.s2_dd > 0.0):
            raise ValueError("need s2_circ > s2_uu > s2_ud > s2_dd > 0")
        if not (self.s1_up > self.s0 > self.s1_down):
            raise ValueError("need s1_up > s0 > s1_down")
        if not (self.s2_uu > self.s1_up):
            raise ValueError("need s2_uu > s1_up")
        if not (self.s1_down < self.s2_ud < self.s1_up):
            raise ValueError("need s1_down < s2_ud < s1_up")
        if not (self.s2_dd < self.s1_down):
            raise ValueError("need s2_dd < s1_down")

    n_paths = 6

    @property
    def nu1(self) -> float:
        """p(up to top) / p(down to top)."""
        return self.p[0] / self.p[3]

    @property
    def nu2(self) -> float:
        """p(up to middle) / p(down to middle)."""
        return self.p[2] / self.p[4]

    @property
    def ds1(self) -> tuple[float, ...]:
        u, d = self.s1_up - self.s0, self.s1_down - self.s0
        return (u, u, u, d, d, d)

    @property
    def ds2(self) -> tuple[float, ...]:
        return (
            self.s2_circ - self.s1_up,
            self.s2_uu - self.s1_up,
            self.s2_ud - self.s1_up,
            self.s2_circ - self.s1_down,
            self.s2_ud - self.s1_down,
            self.s2_dd - self.s1_down,
        )

    first_up = (True, True, True, False, False, False)
    ds3 = (0.0,) * 6


@dataclass(frozen=True)
class TrendLattice:
    """Two-period binomial extended by a third leg after two same-direction
    moves.

    Positive orientation (third leg after up-up), paths 0..4:
    0 = up,up,continue; 1 = ud; 2 = du; 3 = dd; 4 = up,up,reverse.
    Negative orientation (third leg after down-down):
    0 = uu; 1 = ud; 2 = du; 3 = down,down,continue; 4 = down,down,reverse.
    ``s3_continue`` extends the trend, ``s3_reverse`` pulls back toward the
    start.
    """

    orientation: str
    s0: float
    s_up: float
    s_down: float
    s_uu: float
    s_ud: float
    s_dd: float
    s3_continue: float
    s3_reverse: float
    p: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        _check_probs(self.p, 5)
        if self.orientation not in ("positive", "negative"):
            raise ValueError("orientation must be 'positive' or 'negative'")
        if not (self.s_up > self.s0 > self.s_down):
            raise ValueError("need s_up > s0 > s_down")
        if not (self.s_uu > self.s_up):
            raise ValueError("need s_uu > s_up")
        if not (self.s_down < self.s_ud < self.s_up):
            raise ValueError("need s_down < s_ud < s_up")
        if not (self.s_dd < self.s_down):
            raise ValueError("need s_dd < s_down")
        if self.orientation == "positive":
            if not (self.s3_reverse < self.s_uu < self.s3_continue):
                raise ValueError("need s3_reverse < s_uu < s3_continue")
        else:
            if not (self.s3_continue < self.s_dd < self.s3_reverse):
                raise ValueError("need s3_continue < s_dd < s3_reverse")

    n_paths = 5

    @property
    def q(self) -> float:
        """Probability ratio of the two middle paths, p(ud)/p(du)."""
        return self.p[1] / self.p[2]

    @property
    def ds1(self) -> tuple[float, ...]:
        u, d = self.s_up - self.s0, self.s_down - self.s0
        if self.orientation == "positive":
            return (u, u, d, d, u)
        return (u, u, d, d, d)

    @property
    def ds2(self) -> tuple[float, ...]:
        uu = self.s_uu - self.s_up
        ud = self.s_ud - self.s_up
        du = self.s_ud - self.s_down
        dd = self.s_dd - self.s_down
        if self.orientation == "positive":
            return (uu, ud, du, dd, uu)
        return (uu, ud, du, dd, dd)

    @property
    def ds3(self) -> tuple[float, ...]:
        if self.orientation == "positive":
            return (self.s3_continue - self.s_uu, 0.0, 0.0, 0.0,
                    self.s3_reverse - self.s_uu)
        return (0.0, 0.0, 0.0, self.s3_continue - self.s_dd,
                self.s3_reverse - self.s_dd)

    @property
    def first_up(self) -> tuple[bool, ...]:
        if self.orientation == "positive":
            return (True, True, False, False, True)
        return (True, True, False, False, False)

    def embedded_binomial(self) -> TwoPeriodBinomial:
        """The two-period sub-model obtained by merging the third leg; the
        merged same-direction probability is the sum of continue + reverse."""
        if self.orientation == "positive":
            p = (self.p[0] + self.p[4], self.p[1], self.p[2], self.p[3])
        else:
            p = (self.p[0], self.p[1], self.p[2], self.p[3] + self.p[4])
        return TwoPeriodBinomial(self.s0, self.s_up, self.s_down,
                                 self.s_uu, self.s_ud, self.s_dd, p)


@dataclass(frozen=True)
class ScenarioPartition:
    """A finite partition of a model's path indices into scenario cells."""

    cells: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "cells", tuple(frozenset(c) for c in self.cells))
        seen: set[int] = set()
        for cell in self.cells:
            if not cell:
                raise ValueError("partition cells must be nonempty")
            if seen & cell:
                raise ValueError("partition cells must be disjoint")
            seen |= cell

    def validate(self, n_paths: int) -> None:
        union = set().union(*self.cells) if self.cells else set()
        if union != set(range(n_paths)):
            raise ValueError(
                f"partition must cover exactly paths 0..{n_paths - 1}")


@dataclass(frozen=True)
class StrategyVector:
    """Predictable positions per lattice node: phi1 held over the first
    period, phi2_up / phi2_down over the second depending on the first move,
    and optionally phi3 over the third leg of a TrendLattice."""

    phi1: float
    phi2_up: float
    phi2_down: float
    phi3: float | None = None

    def __post_init__(self):
        vals = [self.phi1, self.phi2_up, self.phi2_down]
        if self.phi3 is not None:
            vals.append(self.phi3)
        if any(not math.isfinite(v) for v in vals):
            raise ValueError("strategy components must be finite")


@dataclass(frozen=True)
class NsaCertificate:
    """Outcome of a no-statistical-arbitrage check.

    ``status`` is one of 'NsaCertified', 'SaExists', 'NotCertified';
    ``diagnostics`` holds the scalars the decision was based on.
    """

    status: str
    diagnostics: dict[str, float] = field(default_factory=dict)


# ------------------------------------------------------- payoffs, partitions


def payoff(model, strategy: StrategyVector, path: int) -> float:
    """Gain of ``strategy`` along one path: sum of position * price increment
    over the path's legs."""
    if not 0 <= path < model.n_paths:
        raise KeyError(f"unknown path id {path} for {type(model).__name__}")
    phi2 = strategy.phi2_up if model.first_up[path] else strategy.phi2_down
    gain = strategy.phi1 * model.ds1[path] + phi2 * model.ds2[path]
    if strategy.phi3 is not None:
        gain += strategy.phi3 * model.ds3[path]
    return gain


def expected_gain(model, strategy: StrategyVector) -> float:
    """Unconditional expected gain under the model's path probabilities."""
    return sum(model.p[i] * payoff(model, strategy, i)
               for i in range(model.n_paths))


def conditional_gains(model, strategy: StrategyVector,
                      partition: ScenarioPartition) -> list[float]:
    """Expected gain conditional on each partition cell:
    sum_{w in C} p(w) payoff(w) / sum_{w in C} p(w)."""
    partition.validate(model.n_paths)
    gains = []
    for cell in partition.cells:
        mass = sum(model.p[i] for i in cell)
        acc = sum(model.p[i] * payoff(model, strategy, i) for i in cell)
        gains.append(acc / mass)
    return gains


def is_statistical_arbitrage(model, strategy: StrategyVector,
                             partition: ScenarioPartition) -> bool:
    """True iff every cell's conditional gain is >= -EPS_TOL and the
    unconditional mean gain is > EPS_TOL."""
    cond = conditional_gains(model, strategy, partition)
    if any(g < -EPS_TOL for g in cond):
        return False
    return expected_gain(model, strategy) > EPS_TOL


def terminal_state_partition(model) -> ScenarioPartition:
    """Partition by terminal price state (structural recombination cells)."""
    if isinstance(model, TwoPeriodBinomial):
        return ScenarioPartition((frozenset({0}), frozenset({1, 2}),
                                  frozenset({3})))
    if isinstance(model, TrinomialTopModel):
        return ScenarioPartition((frozenset({0, 3}), frozenset({1}),
                                  frozenset({2, 4}), frozenset({5})))
    raise TypeError(
        "terminal-state partition is defined for the two-step models; "
        "use trend_partition / dichotomy_partition for TrendLattice")


def trend_partition(model: TrendLattice) -> ScenarioPartition:
    """Cells (trend-continue), (middle pair), (opposite extreme), (reverse):
    the partition certified by trend_strategy."""
    return ScenarioPartition((frozenset({0}), frozenset({1, 2}),
                              frozenset({3}), frozenset({4})))


def dichotomy_partition(model: TrendLattice) -> ScenarioPartition:
    """Two cells splitting the paths into terminal-above-start versus
    terminal-below-start scenarios; which paths land where depends on the
    orientation (the reverse path ends at/below start for positive drift,
    at/above start for negative drift)."""
    if model.orientation == "positive":
        return ScenarioPartition((frozenset({0, 1, 2}), frozenset({3, 4})))
    return ScenarioPartition((frozenset({0, 4}), frozenset({1, 2, 3})))


# ------------------------------------- binomial certificates and solver


def binomial_A_matrix(model: TwoPeriodBinomial) -> np.ndarray:
    """3x3 constraint matrix for phi = (phi1, phi2_up, phi2_down): rows are
    the uu-path gain, the dd-path gain, and the q-weighted middle-cell gain,
    with q = p(ud)/p(du)."""
    q = model.q
    ds1, ds2 = model.ds1, model.ds2
    return np.array([
        [ds1[0], ds2[0], 0.0],
        [ds1[3], 0.0, ds2[3]],
        [q * ds1[1] + ds1[2], q * ds2[1], ds2[2]],
    ])


def _scale(model) -> float:
    return max(max(abs(v) for v in model.ds1), max(abs(v) for v in model.ds2))


def tilde_q(model: TwoPeriodBinomial) -> float:
    """Critical value of q = p(ud)/p(du) at which the model admits no
    statistical arbitrage (equivalently, at which det(A) vanishes)."""
    ds1, ds2 = model.ds1, model.ds2
    k1 = ds1[2] * ds2[3] - ds1[3] * ds2[2]
    k2 = ds1[0] * ds2[1] - ds1[1] * ds2[0]
    den = ds2[3] * k2
    if abs(den) <= EPS_TOL * _scale(model) ** 3:
        raise DegenerateModel("critical-ratio denominator vanishes")
    return ds2[0] * k1 / den


def _det3(a: np.ndarray) -> float:
    return (a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]))


def nsa_binomial(model: TwoPeriodBinomial) -> NsaCertificate:
    """Certify the two-period binomial model: NsaCertified iff q equals the
    critical ratio (within EPS_TOL), else SaExists.  Diagnostics carry q,
    the critical ratio, and det(A)."""
    q = model.q
    qt = tilde_q(model)
    a = binomial_A_matrix(model)
    status = "NsaCertified" if abs(q - qt) <= EPS_TOL else "SaExists"
    return NsaCertificate(status, {"q": q, "tilde_q": qt,
                                   "det_A": _det3(a)})


def emm_binomial(model: TwoPeriodBinomial) -> np.ndarray:
    """The unique equivalent martingale measure of the two-period binomial
    model, as path weights (w_uu, w_ud, w_du, w_dd)."""
    ds1, ds2 = model.ds1, model.ds2
    k1 = ds1[2] * ds2[3] - ds1[3] * ds2[2]
    k2 = ds1[0] * ds2[1] - ds1[1] * ds2[0]
    raw = np.array([ds2[1] * k1, -ds2[0] * k1, -ds2[3] * k2, ds2[2] * k2])
    b = (ds2[1] * ((ds1[2] - ds1[0]) * ds2[3] + (ds1[0] - ds1[3]) * ds2[2])
         + ds2[0] * ((ds1[1] - ds1[2]) * ds2[3] + (ds1[3] - ds1[1]) * ds2[2]))
    if abs(b) <= EPS_TOL * _scale(model) ** 3:
        raise DegenerateModel("martingale-measure normalizer vanishes")
    weights = raw / b
    if np.any(weights <= 0.0):
        raise DegenerateModel("martingale measure has a non-positive weight")
    return weights


def solve_binomial_sa(model: TwoPeriodBinomial) -> StrategyVector:
    """Closed-form statistical arbitrage phi = A^-1 (1,1,1) for the
    two-period binomial model; raises NoSaExists when q equals the critical
    ratio (the system is singular exactly there)."""
    q = model.q
    if abs(q - tilde_q(model)) <= EPS_TOL:
        raise NoSaExists("q equals the critical ratio; no arbitrage exists")
    ds1, ds2 = model.ds1, model.ds2
    xi1 = (q * ds2[1] - ds2[0]) * ds2[3] + ds2[0] * ds2[2]
    xi2 = (-(ds1[2] + q * ds1[1] - ds1[0]) * ds2[3]
           - (ds1[0] - ds1[3]) * ds2[2])
    xi3 = (-(q * ds1[3] - q * ds1[0]) * ds2[1]
           - (-ds1[3] + ds1[2] + q * ds1[1]) * ds2[0])
    d = ((q * ds1[0] * ds2[1] + (-ds1[2] - q * ds1[1]) * ds2[0]) * ds2[3]
         + ds1[3] * ds2[0] * ds2[2])
    return StrategyVector(xi1 / d, xi2 / d, xi3 / d)


# ------------------------------------------------- trinomial certificates


def trinomial_nsa(model: TrinomialTopModel) -> NsaCertificate:
    """Sufficient certificate for the trinomial-top model: NsaCertified iff
    nu1 equals -ds2(mid-up)/ds2(top-up) * nu2 and Gamma1 < nu2 <= Gamma2
    (both comparisons padded by EPS_TOL); otherwise NotCertified.  The
    criterion is one-directional, so 'SaExists' is never reported."""
    ds1, ds2 = model.ds1, model.ds2
    scale = _scale(model)
    gamma1_den = ds1[2] - ds2[2] * (ds1[1] / ds2[1])
    gamma2_den = ds1[2] - ds1[0] * (ds2[2] / ds2[0])
    for name, val in (("ds2(dd)", ds2[5]), ("ds2(uu)", ds2[1]),
                      ("ds2(top-up)", ds2[0]),
                      ("gamma1 denominator", gamma1_den),
                      ("gamma2 denominator", gamma2_den)):
        if abs(val) <= EPS_TOL * scale:
            raise DegenerateModel(f"{name} vanishes")
    gamma1 = (-ds1[4] + ds2[4] * (ds1[5] / ds2[5])) / gamma1_den
    gamma2 = ((ds1[5] / ds2[5]) * (ds2[3] + ds2[4]) - ds1[3] - ds1[4]) \
        / gamma2_den
    nu1, nu2 = model.nu1, model.nu2
    linked = abs(nu1 - (-ds2[2] / ds2[0]) * nu2) <= EPS_TOL
    in_band = (gamma1 - EPS_TOL) < nu2 <= (gamma2 + EPS_TOL)
    status = "NsaCertified" if (linked and in_band) else "NotCertified"
    return NsaCertificate(status, {"gamma1": gamma1, "gamma2": gamma2,
                                   "nu1": nu1, "nu2": nu2})


@dataclass(frozen=True)
class PidCheckReport:
    """Result of the path-independent-density check: the unique candidate
    measure matching the model's conditional path ratios, and whether it is a
    valid (strictly positive) equivalent martingale measure."""

    unique_candidate: tuple[float, ...]
    is_valid_emm: bool


def counterexample_pid_check(model: TrinomialTopModel) -> PidCheckReport:
    """Solve for the unique measure that is simultaneously a martingale
    measure and path-independent (same density on paths sharing a terminal
    state: w1/w4 = p1/p4 and w3/w5 = p3/p5).  Nonnegative-screens the
    solution; a strictly positive solution would be an equivalent martingale
    measure."""
    ds1, ds2, p = model.ds1, model.ds2, model.p
    m = np.array([
        [1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        [ds1[0], ds1[0], ds1[0], ds1[3], ds1[3], ds1[3]],
        [ds2[0], ds2[1], ds2[2], 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, ds2[3], ds2[4], ds2[5]],
        [p[3], 0.0, 0.0, -p[0], 0.0, 0.0],
        [0.0, 0.0, p[4], 0.0, -p[2], 0.0],
    ])
    rhs = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    try:
        w = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        raise NoSolution("path-independence constraint system is singular")
    if np.min(w) < -1e-9:
        raise NoSolution("no nonnegative measure satisfies the constraints")
    w = np.where(np.abs(w) <= 1e-12, 0.0, w)
    return PidCheckReport(tuple(float(x) for x in w),
                          bool(np.min(w) > EPS_TOL))


# ------------------------------------------------ three-period strategies


def _binomial_D(ds1, ds2, q: float) -> float:
    return ((q * ds1[0] * ds2[1] + (-ds1[2] - q * ds1[1]) * ds2[0]) * ds2[3]
            + ds1[3] * ds2[0] * ds2[2])


def _solve_embedded(sub: TwoPeriodBinomial, ratio: float) -> StrategyVector:
    """Closed-form solve of the embedded two-period model with an explicit
    probability ratio (the trend lattice supplies ratio = p(ud)/p(du))."""
    ds1, ds2 = sub.ds1, sub.ds2
    xi1 = (ratio * ds2[1] - ds2[0]) * ds2[3] + ds2[0] * ds2[2]
    xi2 = (-(ds1[2] + ratio * ds1[1] - ds1[0]) * ds2[3]
           - (ds1[0] - ds1[3]) * ds2[2])
    xi3 = (-(ratio * ds1[3] - ratio * ds1[0]) * ds2[1]
           - (-ds1[3] + ds1[2] + ratio * ds1[1]) * ds2[0])
    d = _binomial_D(ds1, ds2, ratio)
    return StrategyVector(xi1 / d, xi2 / d, xi3 / d)


def trend_A_matrix(model: TrendLattice,
                   ratio: float | None = None) -> np.ndarray:
    """4x4 constraint matrix for psi = (psi1, psi2_up, psi2_down, psi3).

    Rows: the trend-continue path (third-leg increment in column 4), the
    opposite-extreme path, the q-weighted middle cell, and the trend-reverse
    path.  The three-period strategies satisfy (matrix @ psi) = (1,1,1,alpha).
    """
    q = model.q if ratio is None else ratio
    ds1, ds2, ds3 = model.ds1, model.ds2, model.ds3
    if model.orientation == "positive":
        return np.array([
            [ds1[0], ds2[0], 0.0, ds3[0]],
            [ds1[3], 0.0, ds2[3], 0.0],
            [q * ds1[1] + ds1[2], q * ds2[1], ds2[2], 0.0],
            [ds1[0], ds2[0], 0.0, ds3[4]],
        ])
    return np.array([
        [ds1[0], ds2[0], 0.0, 0.0],
        [ds1[3], 0.0, ds2[3], ds3[3]],
        [q * ds1[1] + ds1[2], q * ds2[1], ds2[2], 0.0],
        [ds1[3], 0.0, ds2[3], ds3[4]],
    ])


def _check_embedded_sa(sub: TwoPeriodBinomial, ratio: float) -> None:
    ds1, ds2 = sub.ds1, sub.ds2
    k1 = ds1[2] * ds2[3] - ds1[3] * ds2[2]
    k2 = ds1[0] * ds2[1] - ds1[1] * ds2[0]
    den = ds2[3] * k2
    if abs(den) <= EPS_TOL * max(map(abs, ds1 + ds2)) ** 3:
        raise DegenerateModel("critical-ratio denominator vanishes")
    if abs(ratio - ds2[0] * k1 / den) <= EPS_TOL:
        raise NoSaExists("embedded two-period model admits no arbitrage")


def trend_strategy(model: TrendLattice, alpha: float = 0.0,
                   ratio: float | None = None) -> StrategyVector:
    """Three-period trend-following strategy for the positive orientation.

    Extends the embedded two-period strategy phi with a third-leg position
    psi3 = (1-alpha)/(ds3(continue) - ds3(reverse)) and shifts the early legs
    by -ds3(continue)*psi3*gamma, where gamma solves A gamma = e1.  Satisfies
    trend_A_matrix(model, ratio) @ psi = (1, 1, 1, alpha).  ``ratio``
    defaults to the model's own p(ud)/p(du); path runners pass the ratio
    implied by barrier exit probabilities instead.
    """
    if model.orientation != "positive":
        raise ValueError("trend_strategy requires the positive orientation")
    sub = model.embedded_binomial()
    if ratio is None:
        ratio = model.q
    _check_embedded_sa(sub, ratio)
    ds1, ds2, ds3 = sub.ds1, sub.ds2, model.ds3
    denom3 = ds3[0] - ds3[4]
    if abs(denom3) <= EPS_TOL * _scale(model):
        raise DegenerateModel("third-leg increments coincide")
    psi3 = (1.0 - alpha) / denom3
    phi = _solve_embedded(sub, ratio)
    d = _binomial_D(ds1, ds2, ratio)
    gamma = (
        ratio * ds2[1] * ds2[3] / d,
        (ds1[3] * ds2[2] - (ratio * ds1[1] + ds1[2]) * ds2[3]) / d,
        -ratio * ds2[1] * ds1[3] / d,
    )
    shift = ds3[0] * psi3
    return StrategyVector(phi.phi1 - shift * gamma[0],
                          phi.phi2_up - shift * gamma[1],
                          phi.phi2_down - shift * gamma[2],
                          psi3)


def gfin_strategy(model: TrendLattice, alpha: float = 0.0,
                  ratio: float | None = None) -> StrategyVector:
    """Three-period strategy certifying the dichotomy partition (terminal
    above/below start), for either orientation.

    Positive orientation: identical construction to trend_strategy (the
    dichotomy cells aggregate the same constraint rows).  Negative
    orientation: third leg after down-down with psi3 = (1-alpha)/(ds3(continue)
    - ds3(reverse)) and early-leg shift along gamma solving A gamma = e2.
    Requires the reverse price not to cross the start (s3_reverse <= s0 for
    positive, >= s0 for negative).
    """
    if model.orientation == "positive":
        if model.s3_reverse > model.s0:
            raise ValueError(
                "positive dichotomy strategy needs s3_reverse <= s0")
        return trend_strategy(model, alpha, ratio)
    if model.s3_reverse < model.s0:
        raise ValueError("negative dichotomy strategy needs s3_reverse >= s0")
    sub = model.embedded_binomial()
    if ratio is None:
        ratio = model.q
    _check_embedded_sa(sub, ratio)
    ds1, ds2, ds3 = sub.ds1, sub.ds2, model.ds3
    denom3 = ds3[3] - ds3[4]
    if abs(denom3) <= EPS_TOL * _scale(model):
        raise DegenerateModel("third-leg increments coincide")
    psi3 = (1.0 - alpha) / denom3
    phi = _solve_embedded(sub, ratio)
    d = _binomial_D(ds1, ds2, ratio)
    gamma = (
        ds2[0] * ds2[2] / d,
        -ds1[0] * ds2[2] / d,
        (-ds2[0] * (ratio * ds1[1] + ds1[2]) + ratio * ds1[0] * ds2[1]) / d,
    )
    shift = ds3[3] * psi3
    return StrategyVector(phi.phi1 - shift * gamma[0],
                          phi.phi2_up - shift * gamma[1],
                          phi.phi2_down - shift * gamma[2],
                          psi3)


def gfin_psi_bounds(model: TrendLattice,
                    base_strategy: StrategyVector) -> tuple[float, float]:
    """Interval of admissible third-leg positions for a given two-period base
    strategy on a positive-orientation lattice.

    With B = base gain along the up-up prefix (phi1*ds1(uu) + phi2_up*ds2(uu)),
    any psi3 in [-B/ds3(continue), -B/ds3(reverse)] keeps both third-leg
    scenarios' gains nonnegative.  Requires ds3(continue) > 0 > ds3(reverse).
    """
    ds3 = model.ds3
    if not (ds3[0] > 0.0 > ds3[4]):
        raise ValueError("bounds need ds3(continue) > 0 > ds3(reverse)")
    b = (base_strategy.phi1 * model.ds1[0]
         + base_strategy.phi2_up * model.ds2[0])
    if b < -EPS_TOL:
        raise InvalidBase("base strategy loses on the up-up prefix")
    b = max(b, 0.0)
    return (-b / ds3[0], -b / ds3[4])
