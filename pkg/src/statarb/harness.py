"""Monte Carlo experiment harness: batched runs, summary metrics, sweeps.

A single experiment simulates ``n_runs`` independent GBM paths and applies
one strategy runner to each.  Per-run seeds are derived with
``np.random.SeedSequence([master_seed, axis_index, run_index])`` so results
are reproducible, independent of scheduling, and independent across both
runs and sweep-axis cells.  Sweeps re-run the experiment once per axis value
with the axis position as the salt, so a single-value sweep reproduces a
plain experiment bit for bit.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import IO, Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import AllRunsSkipped, EmptySample, NoSaExists
from .gbm import GbmParams, embedded_phi, embedded_q
from .paths import simulate_gbm
from .strategies import (
    RunResult,
    StrategyConfig,
    run_embedded_binomial,
    run_follow_trend,
    run_gfin,
)

__all__ = [
    "SWEEP_AXES",
    "SweepAxis",
    "ExperimentConfig",
    "MetricsSummary",
    "ExperimentResult",
    "SweepRow",
    "metrics",
    "run_experiment",
    "sweep",
    "dump_runs_csv",
    "dump_sweep_csv",
    "sweep_markdown",
    "dump_histogram_csv",
]

SWEEP_AXES = ("c", "c_mult", "mu", "sigma", "eta")

_RUNNERS: dict[str, Callable] = {
    "embedded": run_embedded_binomial,
    "trend": run_follow_trend,
    "gfin": run_gfin,
}


class SweepAxis(NamedTuple):
    """A sweep axis: parameter name and the values to visit, in order."""

    name: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    """A batch of independent runs of one strategy under one GBM law."""

    params: GbmParams
    strategy: StrategyConfig
    n_runs: int
    master_seed: int
    sweep: SweepAxis | None = None

    def __post_init__(self) -> None:
        if self.n_runs < 1:
            raise ValueError(f"n_runs must be >= 1, got {self.n_runs}")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if self.sweep is not None:
            if self.sweep.name not in SWEEP_AXES:
                raise ValueError(f"unknown sweep axis {self.sweep.name!r}; "
                                 f"expected one of {SWEEP_AXES}")
            if not self.sweep.values:
                raise ValueError("sweep axis needs at least one value")


@dataclass(frozen=True)
class MetricsSummary:
    """Aggregate statistics of one experiment's per-run P&L sample.

    var95 negates the empirical 5%-quantile (lower order statistic), so
    positive values denote losses.  gain_per_trade divides the mean gain by
    the average number of completed cycles.
    """

    mean_gain: float
    median_gain: float
    var95: float
    gain_per_trade: float
    loss_fraction: float
    loss_mean: float
    avg_n: float
    max_n: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.loss_fraction <= 1.0:
            raise ValueError("loss_fraction outside [0, 1]")
        if not self.max_n >= self.avg_n >= 0.0:
            raise ValueError("expected max_n >= avg_n >= 0")


@dataclass(frozen=True)
class ExperimentResult:
    """Metrics plus the per-run table they were computed from."""

    summary: MetricsSummary
    runs: tuple[RunResult, ...]


class SweepRow(NamedTuple):
    """One sweep cell: the axis value and its experiment summary."""

    param: float
    summary: MetricsSummary


# ---------------------------------------------------------------- metrics


def metrics(pnl: Sequence[float], trades: Sequence[int],
            n: Sequence[int]) -> MetricsSummary:
    """Summarize equal-length per-run samples of P&L, trades and cycles.

    median is the lower-median order statistic; var95 is minus the order
    statistic at 1-based index ceil(0.05 * len) of the sorted P&L.
    """
    pnl = np.asarray(pnl, dtype=float)
    trades = np.asarray(trades, dtype=float)
    n = np.asarray(n, dtype=float)
    if pnl.size == 0:
        raise EmptySample("metrics need at least one run")
    if not pnl.size == trades.size == n.size:
        raise ValueError("pnl, trades and n must have equal lengths")

    ordered = np.sort(pnl)
    size = pnl.size
    mean_gain = float(np.mean(pnl))
    median_gain = float(ordered[(size - 1) // 2])
    var95 = -float(ordered[int(np.ceil(0.05 * size)) - 1])
    losses = pnl[pnl < 0.0]
    loss_mean = float(np.mean(losses)) if losses.size else 0.0
    avg_n = float(np.mean(n))
    gain_per_trade = mean_gain / avg_n if avg_n > 0.0 else 0.0
    return MetricsSummary(
        mean_gain=mean_gain,
        median_gain=median_gain,
        var95=var95,
        gain_per_trade=gain_per_trade,
        loss_fraction=float(losses.size) / size,
        loss_mean=loss_mean,
        avg_n=avg_n,
        max_n=int(np.max(n)),
    )


# ------------------------------------------------------------- experiments


def _run_seed(master_seed: int, axis_index: int, run_index: int) -> int:
    """Deterministic per-run seed: SeedSequence([master, axis, run])."""
    seq = np.random.SeedSequence([master_seed, axis_index, run_index])
    return int(seq.generate_state(1, np.uint64)[0])


def _one_run(config: ExperimentConfig, axis_index: int,
             run_index: int) -> RunResult:
    seed = _run_seed(config.master_seed, axis_index, run_index)
    path = simulate_gbm(config.params, seed=seed)
    runner = _RUNNERS[config.strategy.kind]
    return runner(path, config.params, config.strategy)


def run_experiment(config: ExperimentConfig, *, n_workers: int = 1,
                   axis_index: int = 0) -> ExperimentResult:
    """Execute ``config.n_runs`` seeded runs and aggregate their metrics.

    ``n_workers`` only affects scheduling: results are keyed by run index
    and folded in index order, so any worker count yields identical output.
    Raises AllRunsSkipped when the strategy precondition (q = 1) voids the
    whole batch.
    """
    if n_workers < 1:
        raise ValueError("n_workers must be >= 1")
    c = config.strategy.resolved_c(config.params.mu, config.params.sigma)
    try:
        q = embedded_q(c, config.params.mu, config.params.sigma)
        embedded_phi(c, config.params.s0, q)
    except NoSaExists as exc:
        raise AllRunsSkipped(
            f"q = 1 at c={c!r}: every run is voided") from exc

    indices = range(config.n_runs)
    if n_workers == 1:
        results = [_one_run(config, axis_index, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(
                lambda i: _one_run(config, axis_index, i), indices))
    summary = metrics(
        [r.pnl for r in results],
        [r.trade_count for r in results],
        [r.n_repetitions for r in results],
    )
    return ExperimentResult(summary=summary, runs=tuple(results))


def _apply_axis(config: ExperimentConfig, name: str,
                value: float) -> ExperimentConfig:
    """A copy of ``config`` with one swept parameter replaced."""
    params, strategy = config.params, config.strategy
    if name == "c":
        strategy = replace(strategy, c=float(value), c_mult=None)
    elif name == "c_mult":
        strategy = replace(strategy, c=None, c_mult=float(value))
    elif name == "mu":
        params = replace(params, mu=float(value))
    elif name == "sigma":
        params = replace(params, sigma=float(value))
    elif name == "eta":
        # eta = mu / sigma swept at fixed drift by varying the volatility
        params = replace(params, sigma=params.mu / float(value))
    else:
        raise ValueError(f"unknown sweep axis {name!r}")
    return replace(config, params=params, strategy=strategy, sweep=None)


def sweep(config: ExperimentConfig, *,
          n_workers: int = 1) -> list[SweepRow]:
    """Run one experiment per axis value, salting seeds by axis position."""
    if config.sweep is None:
        raise ValueError("config carries no sweep axis")
    rows = []
    for j, value in enumerate(config.sweep.values):
        cell = _apply_axis(config, config.sweep.name, value)
        result = run_experiment(cell, n_workers=n_workers, axis_index=j)
        rows.append(SweepRow(param=float(value), summary=result.summary))
    return rows


# ------------------------------------------------------------------ output

RUNS_HEADER = "run,pnl,n,trades,ended_by"
SWEEP_HEADER = "param,gain_pa,median,var95,gain_pt,losses,loss_mean,avg_n,max_n"
_SWEEP_COLUMNS = SWEEP_HEADER.split(",")


def _write_metadata(stream: IO[str], metadata: dict[str, str] | None) -> None:
    for key, value in (metadata or {}).items():
        stream.write(f"# {key}={value}\n")


def _summary_cells(param: float, s: MetricsSummary) -> list[str]:
    values = (param, s.mean_gain, s.median_gain, s.var95, s.gain_per_trade,
              s.loss_fraction, s.loss_mean, s.avg_n)
    return [repr(float(v)) for v in values] + [repr(int(s.max_n))]


def dump_runs_csv(result: ExperimentResult, stream: IO[str],
                  metadata: dict[str, str] | None = None) -> None:
    """Write the per-run table as CSV: run,pnl,n,trades,ended_by."""
    _write_metadata(stream, metadata)
    stream.write(RUNS_HEADER + "\n")
    for i, r in enumerate(result.runs):
        stream.write(f"{i},{float(r.pnl)!r},{r.n_repetitions},"
                     f"{r.trade_count},{r.ended_by}\n")


def dump_sweep_csv(rows: Iterable[SweepRow], stream: IO[str],
                   metadata: dict[str, str] | None = None) -> None:
    """Write sweep rows as CSV with the module's fixed header."""
    _write_metadata(stream, metadata)
    stream.write(SWEEP_HEADER + "\n")
    for row in rows:
        stream.write(",".join(_summary_cells(row.param, row.summary)) + "\n")


def sweep_markdown(rows: Iterable[SweepRow]) -> str:
    """Render sweep rows as an aligned GitHub-style markdown table."""
    body = [_summary_cells(row.param, row.summary) for row in rows]
    widths = [max(len(name), *(len(r[k]) for r in body)) if body else
              len(name) for k, name in enumerate(_SWEEP_COLUMNS)]
    lines = [
        "| " + " | ".join(n.ljust(w) for n, w in
                          zip(_SWEEP_COLUMNS, widths)) + " |",
        "| " + " | ".join("-" * w for w in widths) + " |",
    ]
    for cells in body:
        lines.append("| " + " | ".join(
            c.rjust(w) for c, w in zip(cells, widths)) + " |")
    return "\n".join(lines) + "\n"


def dump_histogram_csv(pnl: Sequence[float], stream: IO[str], *,
                       n_bins: int = 50,
                       metadata: dict[str, str] | None = None) -> None:
    """Write equal-width P&L histogram bins as CSV for external plotting."""
    pnl = np.asarray(pnl, dtype=float)
    if pnl.size == 0:
        raise EmptySample("histogram needs at least one value")
    counts, edges = np.histogram(pnl, bins=n_bins)
    _write_metadata(stream, metadata)
    stream.write("bin_left,bin_right,count\n")
    for k in range(counts.size):
        stream.write(f"{float(edges[k])!r},{float(edges[k + 1])!r},"
                     f"{int(counts[k])}\n")
