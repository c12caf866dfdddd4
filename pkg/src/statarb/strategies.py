"""Drive lattice strategies over price paths via barrier-hit schedules.

Each runner iterates trading cycles anchored at the price reached by the
previous cycle: positions are adjusted whenever the path reaches the next
barrier of the schedule, the whole run stops at the first cycle end with
positive cumulative P&L, and an open position is liquidated at the horizon.

Execution modes:
  snap      executions at the exact barrier levels (idealized embedding);
            the next anchor is the final level; horizon liquidation at the
            last marked price, so the leg in flight contributes nothing.
  observed  executions at the simulated grid prices; the next anchor is the
            observed price at the final stop; horizon liquidation at the
            final grid price.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

from .errors import NoSaExists
from .gbm import GbmParams, embedded_phi, embedded_q
from .lattice import StrategyVector, TrendLattice, gfin_strategy, \
    trend_strategy
from .paths import PricePath, TradeLedger, next_hit

__all__ = [
    "RunResult",
    "StrategyConfig",
    "CycleRecord",
    "grid_trend_model",
    "run_embedded_binomial",
    "run_follow_trend",
    "run_gfin",
]

KINDS = ("embedded", "trend", "gfin")
MODES = ("snap", "observed")


@dataclass(frozen=True)
class RunResult:
    """Outcome of one run: realized P&L, the count N of completed cycles,
    the number of ledger events, and what ended the run."""

    pnl: float
    n_repetitions: int
    trade_count: int
    ended_by: str  # "PositivePnl" | "Horizon"


@dataclass(frozen=True)
class StrategyConfig:
    """Which strategy to run and how.

    Exactly one of `c` (fixed relative barrier step) or `c_mult`
    (c = c_mult * |mu| / sigma) must be given; the resulting c must lie in
    (0, 1/2).  alpha is the target gain on the trend-reversal scenario.
    """

    kind: str
    c: float | None = None
    c_mult: float | None = None
    alpha: float = 0.0
    execution_mode: str = "snap"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.execution_mode not in MODES:
            raise ValueError(f"execution_mode must be one of {MODES}")
        if (self.c is None) == (self.c_mult is None):
            raise ValueError("exactly one of c and c_mult must be set")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")

    def resolved_c(self, mu: float, sigma: float) -> float:
        """The relative barrier step for the given drift and volatility."""
        c = self.c if self.c is not None else self.c_mult * abs(mu) / sigma
        if not (0 < c < 0.5):
            raise ValueError(f"resolved c={c} outside (0, 1/2)")
        return c


class CycleRecord(NamedTuple):
    """Diagnostics captured when a cycle's strategy is solved."""

    anchor: float
    c: float
    q: float
    alpha: float
    orientation: str
    psi: StrategyVector


def grid_trend_model(orientation: str, anchor: float,
                     c: float) -> TrendLattice:
    """The trend lattice induced by the barrier grid anchor*(1 + k*c):
    two embedded steps plus a third leg from anchor*(1 +- 2c) to either
    anchor*(1 +- 4c) (trend continues) or back to the anchor (reversal).

    Path probabilities are placeholders; strategy solvers receive the
    probability ratio explicitly.
    """
    p = (0.2,) * 5
    if orientation == "positive":
        return TrendLattice(orientation, anchor, anchor * (1 + c),
                            anchor * (1 - c), anchor * (1 + 2 * c), anchor,
                            anchor * (1 - 2 * c), anchor * (1 + 4 * c),
                            anchor, p)
    return TrendLattice(orientation, anchor, anchor * (1 + c),
                        anchor * (1 - c), anchor * (1 + 2 * c), anchor,
                        anchor * (1 - 2 * c), anchor * (1 - 4 * c),
                        anchor, p)


# ---------------------------------------------------------------------------
# run engines
# ---------------------------------------------------------------------------


def _last_mark(ledger: TradeLedger, anchor: float) -> float:
    return ledger.events[-1][1] if ledger.events else anchor


def _trend_cycle(path: PricePath, i: int, anchor: float, c: float, q: float,
                 alpha: float, orientation: str, snap: bool,
                 solve: Callable[..., StrategyVector], led: TradeLedger,
                 cycle_trace: list[CycleRecord] | None,
                 ) -> tuple[int, float] | None:
    """Execute one trend-schedule cycle from index ``i``: psi1 to the first
    barrier, psi2 to the branch set, optionally psi3 to the third-leg set.

    Returns (final stop index, final stop level), or None when the path
    ends before the cycle completes; the caller liquidates either way.
    """
    prices = path.prices
    model = grid_trend_model(orientation, anchor, c)
    psi = solve(model, alpha, ratio=q)
    if cycle_trace is not None:
        cycle_trace.append(CycleRecord(anchor, c, q, alpha, orientation,
                                       psi))
    led.execute(i, anchor if snap else float(prices[i]),
                psi.phi1 - led.open_position)
    hit1 = next_hit(path, i, {anchor * (1 - c), anchor * (1 + c)},
                    ref_price=anchor)
    if hit1 is None:
        return None
    i1, l1 = hit1
    up = l1 > anchor
    pos2 = psi.phi2_up if up else psi.phi2_down
    led.execute(i1, l1 if snap else float(prices[i1]),
                pos2 - led.open_position)
    trend_level = anchor * (1 + 2 * c) if orientation == "positive" \
        else anchor * (1 - 2 * c)
    levels2 = {anchor * (1 + 2 * c), anchor} if up \
        else {anchor * (1 - 2 * c), anchor}
    hit2 = next_hit(path, i1, levels2, ref_price=l1)
    if hit2 is None:
        return None
    i2, l2 = hit2
    if l2 != trend_level:
        return i2, l2
    led.execute(i2, l2 if snap else float(prices[i2]),
                psi.phi3 - led.open_position)
    levels3 = {anchor, anchor * (1 + 4 * c)} if orientation == "positive" \
        else {anchor * (1 - 4 * c), anchor}
    hit3 = next_hit(path, i2, levels3, ref_price=l2)
    if hit3 is None:
        return None
    return hit3


def run_embedded_binomial(path: PricePath, params: GbmParams,
                          config: StrategyConfig, *,
                          ledger: TradeLedger | None = None,
                          cycle_trace: list[CycleRecord] | None = None,
                          ) -> RunResult:
    """Repeat the two-step embedded binomial strategy along the path.

    Per cycle anchored at a: hold phi1 until the path reaches a(1 +- c),
    then phi2+ or phi2- until it reaches one of {a(1-2c), a, a(1+2c)},
    then liquidate.  Raises NoSaExists when q = 1 (skipped-run marker).
    """
    if config.kind != "embedded":
        raise ValueError("config.kind must be 'embedded'")
    c = config.resolved_c(params.mu, params.sigma)
    q = embedded_q(c, params.mu, params.sigma)
    snap = config.execution_mode == "snap"
    prices = path.prices
    n = prices.size
    led = ledger if ledger is not None else TradeLedger()
    n_rep = 0
    anchor = float(prices[0])
    i = 0
    while i < n - 1:
        phi = embedded_phi(c, anchor, q)
        if cycle_trace is not None:
            cycle_trace.append(CycleRecord(anchor, c, q, config.alpha,
                                           "positive", phi))
        led.execute(i, anchor if snap else float(prices[i]),
                    phi.phi1 - led.open_position)
        hit1 = next_hit(path, i, {anchor * (1 - c), anchor * (1 + c)},
                        ref_price=anchor)
        if hit1 is None:
            break
        i1, l1 = hit1
        pos2 = phi.phi2_up if l1 > anchor else phi.phi2_down
        led.execute(i1, l1 if snap else float(prices[i1]),
                    pos2 - led.open_position)
        hit2 = next_hit(path, i1,
                        {anchor * (1 - 2 * c), anchor, anchor * (1 + 2 * c)},
                        ref_price=l1)
        if hit2 is None:
            break
        i2, l2 = hit2
        led.close_out(i2, l2 if snap else float(prices[i2]))
        n_rep += 1
        if led.cash > 0.0:
            return RunResult(led.cash, n_rep, len(led.events), "PositivePnl")
        anchor = l2 if snap else float(prices[i2])
        i = i2
    pnl = led.close_out(n - 1,
                        _last_mark(led, anchor) if snap
                        else float(prices[-1]))
    return RunResult(pnl, n_rep, len(led.events), "Horizon")


def _run_trend_like(path: PricePath, params: GbmParams,
                    config: StrategyConfig,
                    solve: Callable[..., StrategyVector],
                    ledger: TradeLedger | None,
                    cycle_trace: list[CycleRecord] | None) -> RunResult:
    """Shared engine for the trend-following schedules.

    Per cycle anchored at a: psi1 until a(1 +- c); psi2+- until the branch
    set ({a, a(1+2c)} from above, {a(1-2c), a} from below); if the trend
    barrier was reached, psi3 until the third-leg set ({a, a(1+4c)} for a
    positive orientation, {a(1-4c), a} mirrored), then liquidate.
    """
    if config.alpha == 1.0:
        # the trend leg carries no position; the run is exactly the
        # embedded one
        return run_embedded_binomial(path, params,
                                     replace(config, kind="embedded"),
                                     ledger=ledger, cycle_trace=cycle_trace)
    orientation = "positive" if params.mu >= 0 else "negative"
    c = config.resolved_c(params.mu, params.sigma)
    q = embedded_q(c, params.mu, params.sigma)
    snap = config.execution_mode == "snap"
    prices = path.prices
    n = prices.size
    led = ledger if ledger is not None else TradeLedger()
    n_rep = 0
    anchor = float(prices[0])
    i = 0
    while i < n - 1:
        step = _trend_cycle(path, i, anchor, c, q, config.alpha,
                            orientation, snap, solve, led, cycle_trace)
        if step is None:
            break
        i_end, l_end = step
        led.close_out(i_end, l_end if snap else float(prices[i_end]))
        n_rep += 1
        if led.cash > 0.0:
            return RunResult(led.cash, n_rep, len(led.events), "PositivePnl")
        anchor = l_end if snap else float(prices[i_end])
        i = i_end
    pnl = led.close_out(n - 1,
                        _last_mark(led, anchor) if snap
                        else float(prices[-1]))
    return RunResult(pnl, n_rep, len(led.events), "Horizon")


def run_follow_trend(path: PricePath, params: GbmParams,
                     config: StrategyConfig, *,
                     ledger: TradeLedger | None = None,
                     cycle_trace: list[CycleRecord] | None = None,
                     ) -> RunResult:
    """Trend-following runs: embedded steps plus a third leg riding two
    consecutive moves in the drift direction."""
    if config.kind != "trend":
        raise ValueError("config.kind must be 'trend'")

    def solve(model: TrendLattice, alpha: float,
              ratio: float) -> StrategyVector:
        if model.orientation == "positive":
            return trend_strategy(model, alpha, ratio=ratio)
        return gfin_strategy(model, alpha, ratio=ratio)

    return _run_trend_like(path, params, config, solve, ledger, cycle_trace)


def run_gfin(path: PricePath, params: GbmParams,
             config: StrategyConfig, *,
             ledger: TradeLedger | None = None,
             cycle_trace: list[CycleRecord] | None = None) -> RunResult:
    """Like run_follow_trend, with positions from the reversal-bounded
    solver (identical on this barrier grid, where the reversal level is
    the anchor itself)."""
    if config.kind != "gfin":
        raise ValueError("config.kind must be 'gfin'")

    def solve(model: TrendLattice, alpha: float,
              ratio: float) -> StrategyVector:
        return gfin_strategy(model, alpha, ratio=ratio)

    return _run_trend_like(path, params, config, solve, ledger, cycle_trace)
