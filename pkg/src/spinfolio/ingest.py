"""Price-table ingestion, monthly resampling, returns, and window moments.

Everything downstream works on complete panels: every (date, asset) cell
must be present and strictly positive. Failing loudly here is deliberate;
silent imputation would contaminate the rolling indicators.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

COVARIANCE_SYMMETRY_TOL = 1e-12
PSD_RELATIVE_TOL = 1e-10


class ParseError(ValueError):
    """Raised when a price table violates the input contract."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PricePanel:
    """Complete panel of strictly positive prices, one row per date."""

    dates: tuple[dt.date, ...]
    assets: tuple[str, ...]
    prices: np.ndarray  # shape (len(dates), len(assets))

    def __post_init__(self) -> None:
        prices = _frozen(self.prices)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "prices", prices)
        if len(self.dates) < 2 or len(self.assets) < 2:
            raise ValueError(
                f"panel needs at least 2 dates and 2 assets, got "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        if prices.shape != (len(self.dates), len(self.assets)):
            raise ValueError(
                f"price matrix shape {prices.shape} does not match "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        for a, b in zip(self.dates, self.dates[1:]):
            if a >= b:
                raise ValueError("dates not strictly increasing")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0.0):
            raise ValueError("all prices must be finite and > 0")

    @property
    def n_assets(self) -> int:
        return len(self.assets)


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """Simple per-period returns; one fewer row than the source prices."""

    dates: tuple[dt.date, ...]
    assets: tuple[str, ...]
    returns: np.ndarray

    def __post_init__(self) -> None:
        returns = _frozen(self.returns)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "returns", returns)
        if returns.shape != (len(self.dates), len(self.assets)):
            raise ValueError(
                f"return matrix shape {returns.shape} does not match "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        for a, b in zip(self.dates, self.dates[1:]):
            if a >= b:
                raise ValueError("dates not strictly increasing")
        if np.any(returns <= -1.0):
            raise ValueError("returns must be > -1 (prices are positive)")

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    @property
    def n_rows(self) -> int:
        return len(self.dates)


@dataclass(frozen=True, eq=False)
class MarketMoment:
    """Mean-return vector and sample covariance for one trailing window."""

    asset_count: int
    mean_returns: np.ndarray
    covariance: np.ndarray
    assets: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        mean = _frozen(self.mean_returns)
        cov = _frozen(self.covariance)
        object.__setattr__(self, "mean_returns", mean)
        object.__setattr__(self, "covariance", cov)
        n = self.asset_count
        if n < 1:
            raise ValueError("asset_count must be >= 1")
        if mean.shape != (n,):
            raise ValueError(f"mean_returns shape {mean.shape}, expected ({n},)")
        if cov.shape != (n, n):
            raise ValueError(f"covariance shape {cov.shape}, expected ({n}, {n})")
        asym = float(np.max(np.abs(cov - cov.T), initial=0.0))
        if asym > COVARIANCE_SYMMETRY_TOL:
            raise ValueError(f"covariance asymmetric by {asym:.3e}")
        eigs = np.linalg.eigvalsh(cov)
        largest = float(eigs[-1])
        if float(eigs[0]) < -PSD_RELATIVE_TOL * max(largest, 0.0):
            raise ValueError(
                f"covariance not positive semidefinite: min eigenvalue "
                f"{eigs[0]:.3e} vs largest {largest:.3e}"
            )


def parse_price_table(source: str | TextIO) -> PricePanel:
    """Parse the wide-format price CSV: ``date,<asset1>,<asset2>,...``.

    Accepts a string or a text stream. Dates are ISO ``YYYY-MM-DD``, prices
    use ``.`` decimals, and every cell is required. Errors carry the
    offending row number (1-based, header is row 1) and column.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input: no header row") from None
    if header and header[0]:
        header[0] = header[0].lstrip("﻿")
    header = [cell.strip() for cell in header]
    if not header or header[0] != "date":
        raise ParseError(
            f"malformed header: first column must be 'date', got {header[:1]!r}"
        )
    assets = header[1:]
    if len(assets) < 2:
        raise ParseError(f"header must name at least 2 assets, got {len(assets)}")
    if any(a == "" for a in assets):
        raise ParseError("malformed header: empty asset name")
    if len(set(assets)) != len(assets):
        dupes = sorted({a for a in assets if assets.count(a) > 1})
        raise ParseError(f"malformed header: duplicate asset names {dupes}")

    dates: list[dt.date] = []
    rows: list[list[float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and row[0].strip() == ""):
            continue  # tolerate trailing blank line
        if len(row) != len(header):
            raise ParseError(
                f"row {lineno}: expected {len(header)} cells, got {len(row)}"
            )
        raw_date = row[0].strip()
        try:
            date = dt.date.fromisoformat(raw_date)
        except ValueError:
            raise ParseError(
                f"row {lineno}: invalid date {raw_date!r} (expected YYYY-MM-DD)"
            ) from None
        if dates and date <= dates[-1]:
            raise ParseError(f"row {lineno}: dates not strictly increasing")
        prices_row: list[float] = []
        for asset, cell in zip(assets, row[1:]):
            text = cell.strip()
            if text == "":
                raise ParseError(f"row {lineno}: missing price for asset {asset!r}")
            try:
                value = float(text)
            except ValueError:
                raise ParseError(
                    f"row {lineno}: non-numeric price {text!r} for asset {asset!r}"
                ) from None
            if not np.isfinite(value) or value <= 0.0:
                raise ParseError(
                    f"row {lineno}: non-positive price {text} for asset {asset!r}"
                )
            prices_row.append(value)
        dates.append(date)
        rows.append(prices_row)

    if len(rows) < 2:
        raise ParseError(f"need at least 2 data rows, got {len(rows)}")
    return PricePanel(tuple(dates), tuple(assets), np.array(rows, dtype=np.float64))


def load_price_csv(path: str) -> PricePanel:
    """Read and parse a price CSV file (UTF-8, LF or CRLF)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_price_table(fh)


def resample_monthly(panel: PricePanel) -> PricePanel:
    """Keep the last available observation of each calendar month.

    Idempotent: an already-monthly panel comes back unchanged.
    """
    keep: list[int] = []
    months = [(d.year, d.month) for d in panel.dates]
    for i, month in enumerate(months):
        if i + 1 == len(months) or months[i + 1] != month:
            keep.append(i)
    dates = tuple(panel.dates[i] for i in keep)
    return PricePanel(dates, panel.assets, panel.prices[keep, :])


def compute_returns(panel: PricePanel) -> ReturnPanel:
    """Simple returns ``P[t+1]/P[t] - 1``, dated at the later observation."""
    if len(panel.dates) < 2:
        raise ValueError("need at least 2 price rows to compute returns")
    returns = panel.prices[1:, :] / panel.prices[:-1, :] - 1.0
    return ReturnPanel(panel.dates[1:], panel.assets, returns)


def slice_window(panel: ReturnPanel, end_index: int, window_len: int) -> ReturnPanel:
    """Contiguous trailing window of ``window_len`` rows ending at ``end_index``."""
    if window_len < 2:
        raise ValueError(f"window_len must be >= 2, got {window_len}")
    if end_index >= panel.n_rows:
        raise ValueError(
            f"end_index {end_index} out of range for {panel.n_rows} rows"
        )
    start = end_index - window_len + 1
    if start < 0:
        raise ValueError(
            f"insufficient history: window of {window_len} rows ending at "
            f"index {end_index} needs {window_len - end_index - 1} more rows"
        )
    return ReturnPanel(
        panel.dates[start : end_index + 1],
        panel.assets,
        panel.returns[start : end_index + 1, :],
    )


def estimate_moment(window: ReturnPanel) -> MarketMoment:
    """Sample mean and 1/(T-1) covariance of a return window.

    The covariance is symmetrized by averaging with its transpose so the
    MarketMoment invariants hold exactly.
    """
    t = window.n_rows
    if t < 2:
        raise ValueError(f"need at least 2 return rows, got {t}")
    r = window.returns
    mean = r.mean(axis=0)
    centered = r - mean
    cov = centered.T @ centered / (t - 1)
    cov = (cov + cov.T) / 2.0
    return MarketMoment(window.n_assets, mean, cov, assets=window.assets)
