"""Rolling market-state indicators built on frontier sweeps.

For each rolling window of monthly returns we sweep the lambda frontier
and record three numbers: the integrated magnetization M, the first
zero-crossing lambda E, and the first |m|-peak lambda E'. The zero-event
series then feeds a cumulative averaged rolling mean (CARM) with an
N-month horizon, optionally rescaled by the median of its positive part.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .frontier import (
    LambdaGrid,
    detect_max_event,
    detect_zero_event,
    integrated_magnetization,
    sweep_frontier,
)
from .ingest import ReturnPanel, estimate_moment, slice_window
from .solver import SolverConfig, SolverError


@dataclass(frozen=True, eq=False)
class IndicatorPoint:
    """Frontier summary for one window, stamped with the window-end date."""

    date: dt.date
    integrated_m: float
    zero_event: float
    max_event: float
    magnetization_curve: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not -1.0 <= self.integrated_m <= 1.0:
            raise ValueError(f"integrated_m outside [-1, 1]: {self.integrated_m!r}")
        for name in ("zero_event", "max_event"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} outside [0, 1]: {v!r}")
        if self.magnetization_curve is not None:
            arr = np.ascontiguousarray(self.magnetization_curve, dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, "magnetization_curve", arr)


@dataclass(frozen=True, eq=False)
class IndicatorSeries:
    """Indicator points on a contiguous monthly date axis."""

    points: tuple[IndicatorPoint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError("indicator series must not be empty")
        for a, b in zip(self.points, self.points[1:]):
            if b.date <= a.date:
                raise ValueError("indicator dates not strictly increasing")
            step = (b.date.year * 12 + b.date.month) - (
                a.date.year * 12 + a.date.month
            )
            if step != 1:
                raise ValueError(
                    f"indicator dates must advance one month at a time; "
                    f"{a.date.isoformat()} -> {b.date.isoformat()}"
                )

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dates(self) -> tuple[dt.date, ...]:
        return tuple(p.date for p in self.points)

    @property
    def integrated_m(self) -> np.ndarray:
        return np.array([p.integrated_m for p in self.points])

    @property
    def zero_events(self) -> np.ndarray:
        return np.array([p.zero_event for p in self.points])

    @property
    def max_events(self) -> np.ndarray:
        return np.array([p.max_event for p in self.points])


def rolling_scan(
    panel: ReturnPanel,
    window_len: int,
    grid: LambdaGrid | None = None,
    cfg: SolverConfig | None = None,
    solver: str = "heuristic",
    keep_curves: bool = False,
) -> IndicatorSeries:
    """Sweep every length-``window_len`` trailing window of the panel.

    Emits one point per window end, i.e. ``panel.n_rows - window_len + 1``
    points. A solver failure aborts the scan with the offending date.
    """
    if window_len < 2:
        raise ValueError("window_len must be >= 2 to estimate a covariance")
    if panel.n_rows < window_len:
        raise ValueError(
            f"panel has {panel.n_rows} rows, needs at least {window_len}"
        )
    grid = grid or LambdaGrid.uniform()
    cfg = cfg or SolverConfig()
    points: list[IndicatorPoint] = []
    for end in range(window_len - 1, panel.n_rows):
        date = panel.dates[end]
        moment = estimate_moment(slice_window(panel, end, window_len))
        try:
            curve = sweep_frontier(moment, grid, cfg, solver=solver)
        except SolverError as exc:
            raise SolverError(f"window ending {date.isoformat()}: {exc}") from exc
        points.append(
            IndicatorPoint(
                date=date,
                integrated_m=integrated_magnetization(curve),
                zero_event=detect_zero_event(curve),
                max_event=detect_max_event(curve),
                magnetization_curve=curve.magnetizations if keep_curves else None,
            )
        )
    return IndicatorSeries(tuple(points))


@dataclass(frozen=True)
class CarmConfig:
    """Horizon and normalization switches for the CARM smoother.

    The step delta is the series' own monthly spacing; only 1 is
    supported because IndicatorSeries enforces contiguous months.
    """

    horizon_n: int = 12
    step_delta_months: int = 1
    normalize_by_median: bool = True

    def __post_init__(self) -> None:
        if self.horizon_n < 1:
            raise ValueError("horizon_n must be >= 1")
        if self.step_delta_months != 1:
            raise ValueError("only the series' native monthly step is supported")


def carm(values, horizon_n: int = 12) -> np.ndarray:
    """Cumulative averaged rolling mean of a monthly series.

    output[t] = (1/N) * sum_{i=1..N} ( sum_{j=0..i} v[t-j] ) / i

    with v taken as zero before the start of the series. Note the inner
    sum runs over i+1 terms but is divided by i.
    """
    if horizon_n < 1:
        raise ValueError("horizon_n must be >= 1")
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("values must be one-dimensional")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    cum = np.cumsum(v)
    out = np.zeros_like(v)
    for i in range(1, horizon_n + 1):
        # sum_{j=0..i} v[t-j] = cum[t] - cum[t-i-1], zero-padded on the left
        shifted = np.zeros_like(cum)
        if v.size > i + 1:
            shifted[i + 1 :] = cum[: -(i + 1)]
        out += (cum - shifted) / i
    return out / horizon_n


def median_normalize(values) -> tuple[np.ndarray, float | None]:
    """Rescale by the median of the strictly positive entries.

    Returns the scaled series and the divisor; if no entry is strictly
    positive the series is returned unchanged with divisor ``None``.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    positive = v[v > 0.0]
    if positive.size == 0:
        return v.copy(), None
    q = float(np.median(positive))
    return v / q, q


def carm_series(values, cfg: CarmConfig | None = None) -> tuple[np.ndarray, float | None]:
    """CARM plus optional median normalization, as one pipeline step."""
    cfg = cfg or CarmConfig()
    raw = carm(values, cfg.horizon_n)
    if not cfg.normalize_by_median:
        return raw, None
    return median_normalize(raw)
