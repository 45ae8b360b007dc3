"""Shared fixtures: one-time kernel warmup and synthetic price tables."""

from __future__ import annotations

import numpy as np
import pytest

from spinfolio import _qp
from spinfolio.selftest import month_sequence


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile (or load from disk cache) the jitted kernels before any test
    so timed sections measure solve time, not JIT latency."""
    _qp.warmup()


def synthetic_prices(rng, n_assets, n_price_rows, mean=0.003, vol=0.05,
                     start_year=2005):
    """Monthly price paths driven by i.i.d. simple returns."""
    rets = mean + rng.normal(0.0, vol, size=(n_price_rows - 1, n_assets))
    rets = np.maximum(rets, -0.9)
    growth = np.vstack([np.ones(n_assets), 1.0 + rets])
    prices = 100.0 * np.cumprod(growth, axis=0)
    return month_sequence(n_price_rows, start_year), prices


def price_csv_text(dates, prices, assets=None):
    n = prices.shape[1]
    if assets is None:
        assets = [f"A{i:02d}" for i in range(n)]
    lines = ["date," + ",".join(assets)]
    for d, row in zip(dates, prices):
        lines.append(d.isoformat() + "," + ",".join(f"{p:.10f}" for p in row))
    return "\n".join(lines) + "\n"


@pytest.fixture()
def make_price_csv(tmp_path):
    """Factory writing a synthetic monthly price CSV; returns its path."""

    def _make(n_assets=5, n_price_rows=41, seed=7, mean=0.003, vol=0.05,
              name="prices.csv"):
        rng = np.random.default_rng(seed)
        dates, prices = synthetic_prices(rng, n_assets, n_price_rows,
                                         mean=mean, vol=vol)
        path = tmp_path / name
        path.write_text(price_csv_text(dates, prices), encoding="utf-8")
        return path

    return _make
