"""Simulated price paths, barrier-hit detection, and trade accounting.

A PricePath is an immutable discrete observation grid of a price process.
next_hit scans it for the first touch or crossing of a set of barrier
levels, and TradeLedger accumulates the mark-to-market P&L of position
changes executed along the way.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple

import numpy as np

from .gbm import GbmParams

__all__ = [
    "PricePath",
    "HitEvent",
    "TradeLedger",
    "simulate_gbm",
    "next_hit",
    "dump_path",
]


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PricePath:
    """Prices observed on a strictly increasing time grid.

    `seed` is the reproducibility token the path was generated from (None
    for hand-built paths).  The arrays are locked read-only so a path can
    be shared freely.
    """

    times: np.ndarray
    prices: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        prices = np.asarray(self.prices, dtype=float)
        if times.ndim != 1 or times.shape != prices.shape:
            raise ValueError("times and prices must be 1-d and same length")
        if times.size < 1:
            raise ValueError("path needs at least one point")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(prices > 0):
            raise ValueError("prices must be positive")
        times.setflags(write=False)
        prices.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "prices", prices)

    @property
    def n_points(self) -> int:
        return int(self.prices.size)


def simulate_gbm(params: GbmParams, seed: int, *,
                 zero_noise: bool = False) -> PricePath:
    """Simulate GBM on an equally spaced grid by exact log-normal stepping
    S_{k+1} = S_k * exp((mu - sigma^2/2) dt + sigma sqrt(dt) Z_k).

    The same (params, seed) always produces the identical path.
    `zero_noise` forces every Z_k to 0, leaving the deterministic skeleton
    s0 * exp((mu - sigma^2/2) k dt) — a test hook.
    """
    n, dt = params.n_steps, params.dt
    if zero_noise:
        z = np.zeros(n)
    else:
        z = np.random.default_rng(seed).standard_normal(n)
    steps = (params.mu - 0.5 * params.sigma**2) * dt \
        + params.sigma * np.sqrt(dt) * z
    log_prices = np.concatenate(([0.0], np.cumsum(steps)))
    prices = params.s0 * np.exp(log_prices)
    times = np.linspace(0.0, params.horizon, n + 1)
    return PricePath(times, prices, seed=int(seed))


def dump_path(path: PricePath, stream: IO[str]) -> None:
    """Write the path as CSV with header `t,price`, one row per grid point."""
    stream.write("t,price\n")
    for t, p in zip(path.times, path.prices):
        stream.write(f"{float(t)!r},{float(p)!r}\n")


# ---------------------------------------------------------------------------
# barrier hits
# ---------------------------------------------------------------------------


class HitEvent(NamedTuple):
    """First touch/crossing of a barrier: grid index and the level hit."""

    index: int
    level: float


def _segment_level(p0: float, p1: float, levels: np.ndarray) -> float | None:
    """The crossed/touched level nearest the segment start, or None."""
    d0 = p0 - levels
    d1 = p1 - levels
    crossed = (d0 * d1 < 0) | (d1 == 0)
    if not np.any(crossed):
        return None
    hit_levels = levels[crossed]
    return float(hit_levels[np.argmin(np.abs(hit_levels - p0))])


def next_hit(path: PricePath, from_index: int, levels: Iterable[float],
             ref_price: float | None = None) -> HitEvent | None:
    """First index > from_index where the path touches or crosses a level.

    A crossing is a sign change of price - level between consecutive grid
    points; touching counts at the right endpoint of a segment, so a path
    that starts on a level and moves away has not hit it.  When several
    levels are crossed inside one segment the one nearest the segment start
    is reported (the one reached first by any monotone bridge).

    `ref_price` prepends a virtual segment ref_price -> prices[from_index],
    allowing a hit at from_index itself: it carries barrier state across
    re-anchoring, when the previous execution level and the current grid
    price straddle a new barrier.  Returns None if the horizon is reached
    without a hit.
    """
    prices = path.prices
    n = prices.size
    if not (0 <= from_index < n):
        raise ValueError(f"from_index {from_index} outside path")
    lv = np.asarray(sorted(set(float(v) for v in levels)), dtype=float)
    if lv.size == 0:
        raise ValueError("levels must be nonempty")

    if ref_price is not None:
        level = _segment_level(float(ref_price), float(prices[from_index]),
                               lv)
        if level is not None:
            return HitEvent(from_index, level)

    block = 128
    k = from_index
    while k < n - 1:
        stop = min(n - 1, k + block)
        p0 = prices[k:stop]
        p1 = prices[k + 1:stop + 1]
        d0 = p0[:, None] - lv[None, :]
        d1 = p1[:, None] - lv[None, :]
        hits = np.any((d0 * d1 < 0) | (d1 == 0), axis=1)
        if np.any(hits):
            j = k + int(np.argmax(hits))
            level = _segment_level(float(prices[j]), float(prices[j + 1]),
                                   lv)
            assert level is not None
            return HitEvent(j + 1, level)
        k = stop
        block = min(2 * block, 65536)
    return None


# ---------------------------------------------------------------------------
# trade ledger
# ---------------------------------------------------------------------------


@dataclass
class TradeLedger:
    """Mark-to-market P&L accounting for a sequence of position changes.

    cash holds -sum(delta * price) over all events; once the position is
    flat, cash is the realized P&L of the round trip.
    """

    events: list[tuple[int, float, float]] = field(default_factory=list)
    cash: float = 0.0
    open_position: float = 0.0

    def execute(self, time_index: int, price: float,
                position_delta: float) -> "TradeLedger":
        """Change the position by position_delta at the given price."""
        if not (price > 0):
            raise ValueError("price must be positive")
        self.events.append((int(time_index), float(price),
                            float(position_delta)))
        self.cash -= position_delta * price
        self.open_position += position_delta
        return self

    def close_out(self, time_index: int, price: float) -> float:
        """Flatten the position at the given price; returns cumulative P&L.

        Closing an already-flat ledger is legal and returns current cash.
        """
        if self.open_position != 0.0:
            self.execute(time_index, price, -self.open_position)
            self.open_position = 0.0
        return self.cash
