"""Walk-forward backtesting of the drift-sign barrier strategy on CSVs.

The backtester walks a daily close series: at each cycle start it estimates
(mu, sigma) by maximum likelihood on the trailing window (strictly earlier
observations only), anchors the barrier grid at the current close, picks the
orientation from the sign of the estimated drift, and executes the final
above/below-start schedule on observed prices.  Cycles chain across the
whole series — no stop-at-first-gain — and any open position is liquidated
at the last close, so every backtest ends flat.
"""
from __future__ import annotations

import datetime
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, NamedTuple

import numpy as np

from .errors import (
    DegenerateModel,
    InsufficientData,
    NonMonotoneDates,
    NoSaExists,
    NoSolution,
    ParseError,
)
from .gbm import embedded_q, mle_estimate
from .lattice import StrategyVector, TrendLattice, gfin_strategy
from .paths import PricePath, TradeLedger
from .strategies import _trend_cycle

__all__ = [
    "MarketSeries",
    "BacktestConfig",
    "CycleLog",
    "BacktestResult",
    "load_csv",
    "dump_csv",
    "run_backtest",
    "summary_json",
    "dump_summary_json",
    "dump_cycles_csv",
]

MARKET_HEADER = "date,close"
CYCLES_HEADER = "cycle_start,cycle_end,mu_hat,sigma_hat,orientation,pnl,traded_qty"


@dataclass(frozen=True)
class MarketSeries:
    """Daily closes keyed by strictly increasing calendar dates."""

    dates: tuple[datetime.date, ...]
    closes: np.ndarray

    def __post_init__(self) -> None:
        closes = np.asarray(self.closes, dtype=float)
        closes.setflags(write=False)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "closes", closes)
        if len(self.dates) != closes.size:
            raise ValueError("dates and closes must have equal lengths")
        if closes.size == 0:
            raise ValueError("series must not be empty")
        if not np.all(closes > 0.0):
            raise ValueError("closes must be positive")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise NonMonotoneDates("dates must be strictly increasing")

    @property
    def n_points(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class BacktestConfig:
    """Estimation window, barrier width and execution parameters."""

    boundary_fraction: float
    window_days: int = 756
    alpha: float = 0.0
    dt: float = 1.0 / 252.0

    def __post_init__(self) -> None:
        if not 0.0 < self.boundary_fraction < 0.5:
            raise ValueError("boundary_fraction must lie in (0, 1/2)")
        if self.window_days < 60:
            raise ValueError("window_days must be >= 60")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


class CycleLog(NamedTuple):
    """One completed cycle of the walk-forward backtest."""

    cycle_start: datetime.date
    cycle_end: datetime.date
    mu_hat: float
    sigma_hat: float
    orientation: str
    pnl: float
    traded_qty: float


@dataclass(frozen=True)
class BacktestResult:
    """Backtest outcome: total P&L, its normalizations, and the cycle log.

    gpta divides total P&L by the total traded notional sum(|delta|*price),
    which is invariant under a uniform currency rescaling of the series;
    the per-cycle traded quantities allow recomputing per-unit variants.
    """

    gpta: float
    total_pnl: float
    n_cycles: int
    traded_qty: float
    traded_notional: float
    window_days: int
    boundary_fraction: float
    cycles: tuple[CycleLog, ...]


# --------------------------------------------------------------------- io


def load_csv(source: str | Path | IO[str]) -> MarketSeries:
    """Parse a `date,close` CSV (ISO dates, positive decimal closes).

    Lines starting with `#` are metadata and skipped; errors carry the
    1-based physical line number.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_csv(fh)
    dates: list[datetime.date] = []
    closes: list[float] = []
    saw_header = False
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not saw_header:
            if line != MARKET_HEADER:
                raise ParseError(f"expected header {MARKET_HEADER!r}, "
                                 f"got {line!r}", lineno)
            saw_header = True
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise ParseError(f"expected 2 fields, got {len(fields)}", lineno)
        try:
            day = datetime.date.fromisoformat(fields[0])
        except ValueError:
            raise ParseError(f"bad ISO date {fields[0]!r}", lineno) from None
        try:
            close = float(fields[1])
        except ValueError:
            raise ParseError(f"bad price {fields[1]!r}", lineno) from None
        if not np.isfinite(close) or close <= 0.0:
            raise ParseError(f"non-positive price {fields[1]!r}", lineno)
        dates.append(day)
        closes.append(close)
    if not saw_header:
        raise ParseError(f"missing header {MARKET_HEADER!r}", 1)
    if not dates:
        raise ParseError("no data rows", 2)
    return MarketSeries(tuple(dates), np.array(closes))


def dump_csv(series: MarketSeries, stream: IO[str],
             metadata: dict[str, str] | None = None) -> None:
    """Write a series as `date,close` rows that load_csv round-trips."""
    for key, value in (metadata or {}).items():
        stream.write(f"# {key}={value}\n")
    stream.write(MARKET_HEADER + "\n")
    for day, close in zip(series.dates, series.closes):
        stream.write(f"{day.isoformat()},{float(close)!r}\n")


# --------------------------------------------------------------- backtest


def _gfin_solve(model: TrendLattice, alpha: float,
                ratio: float) -> StrategyVector:
    return gfin_strategy(model, alpha, ratio=ratio)


def run_backtest(series: MarketSeries, config: BacktestConfig, *,
                 ledger: TradeLedger | None = None) -> BacktestResult:
    """Walk the series forward, trading one barrier cycle at a time.

    Each cycle uses only observations strictly before its start for the
    (mu, sigma) estimate; mu_hat >= 0 selects the positive orientation.
    Windows where the critical ratio degenerates (q = 1) are skipped by
    one observation.  A final cycle interrupted by the end of data is
    liquidated at the last close and included in total_pnl but not in the
    per-cycle log (n_cycles counts completed cycles).
    """
    n = series.n_points
    window = config.window_days
    if n < window + 2:
        raise InsufficientData(
            f"need more than {window + 1} observations, have {n}")
    closes = series.closes
    path = PricePath(np.arange(n, dtype=float) * config.dt, closes)
    led = ledger if ledger is not None else TradeLedger()
    cycles: list[CycleLog] = []
    c = config.boundary_fraction
    i = window
    while i < n - 1:
        mu_hat, sigma_hat = mle_estimate(closes[i - window:i], config.dt)
        orientation = "positive" if mu_hat >= 0 else "negative"
        anchor = float(closes[i])
        cash_before = led.cash
        events_before = len(led.events)
        try:
            q = embedded_q(c, mu_hat, sigma_hat)
            step = _trend_cycle(path, i, anchor, c, q, config.alpha,
                                orientation, False, _gfin_solve, led, None)
        except (NoSaExists, NoSolution, DegenerateModel):
            i += 1
            continue
        if step is None:
            break
        i_end, _ = step
        led.close_out(i_end, float(closes[i_end]))
        qty = sum(abs(delta) for _, _, delta in led.events[events_before:])
        cycles.append(CycleLog(series.dates[i], series.dates[i_end],
                               mu_hat, sigma_hat, orientation,
                               led.cash - cash_before, qty))
        i = i_end
    total_pnl = led.close_out(n - 1, float(closes[-1]))
    traded_qty = sum(abs(delta) for _, _, delta in led.events)
    traded_notional = sum(abs(delta) * price
                          for _, price, delta in led.events)
    gpta = total_pnl / traded_notional if traded_notional > 0.0 else 0.0
    return BacktestResult(
        gpta=gpta,
        total_pnl=total_pnl,
        n_cycles=len(cycles),
        traded_qty=traded_qty,
        traded_notional=traded_notional,
        window_days=window,
        boundary_fraction=c,
        cycles=tuple(cycles),
    )


# ------------------------------------------------------------------ output


def summary_json(result: BacktestResult,
                 metadata: dict[str, str] | None = None) -> dict:
    """The summary as a JSON-ready dict; metadata rides in a _meta object
    (a `#` comment line would break JSON parsers)."""
    payload: dict = {
        "gpta": float(result.gpta),
        "n_cycles": int(result.n_cycles),
        "total_pnl": float(result.total_pnl),
        "traded_qty": float(result.traded_qty),
        "traded_notional": float(result.traded_notional),
        "window_days": int(result.window_days),
        "boundary_fraction": float(result.boundary_fraction),
    }
    if metadata:
        payload["_meta"] = dict(metadata)
    return payload


def dump_summary_json(result: BacktestResult, stream: IO[str],
                      metadata: dict[str, str] | None = None) -> None:
    json.dump(summary_json(result, metadata), stream, sort_keys=True,
              indent=2)
    stream.write("\n")


def dump_cycles_csv(result: BacktestResult, stream: IO[str],
                    metadata: dict[str, str] | None = None) -> None:
    """Write the per-cycle log as CSV with the module's fixed header."""
    for key, value in (metadata or {}).items():
        stream.write(f"# {key}={value}\n")
    stream.write(CYCLES_HEADER + "\n")
    for row in result.cycles:
        stream.write(f"{row.cycle_start.isoformat()},"
                     f"{row.cycle_end.isoformat()},"
                     f"{float(row.mu_hat)!r},{float(row.sigma_hat)!r},"
                     f"{row.orientation},{float(row.pnl)!r},"
                     f"{float(row.traded_qty)!r}\n")
