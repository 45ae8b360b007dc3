"""Portfolio weights on the L1 unit sphere and the scalarized objective.

A portfolio is a weight vector with unit L1 norm; short positions carry
negative weight. The objective traded off by ``lam`` is
``-lam * return + (1 - lam) * variance``; its sum of weights (the
"magnetization") is the directional reading used by the indicators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import MarketMoment

BUDGET_TOL = 1e-10
VARIANCE_CLAMP = 1e-12


@dataclass(frozen=True, eq=False)
class Portfolio:
    """Weight vector with ``sum(|w|) == 1`` within BUDGET_TOL."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size < 1:
            raise ValueError(f"weights must be a non-empty vector, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        l1 = float(np.sum(np.abs(w)))
        if abs(l1 - 1.0) > BUDGET_TOL:
            raise ValueError(
                f"budget violation: sum(|w|) = {l1!r}, must be 1 within {BUDGET_TOL}"
            )

    def __len__(self) -> int:
        return int(self.weights.size)


def validate_budget(weights) -> Portfolio:
    """Check the unit-L1 budget and wrap the vector as a Portfolio."""
    return Portfolio(np.asarray(weights, dtype=np.float64))


def _check_dims(p: Portfolio, m: MarketMoment) -> None:
    if len(p) != m.asset_count:
        raise ValueError(
            f"dimension mismatch: portfolio has {len(p)} weights, "
            f"moment has {m.asset_count} assets"
        )


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    return lam


def portfolio_return(p: Portfolio, m: MarketMoment) -> float:
    """Weighted average return ``sum_i R_i w_i``."""
    _check_dims(p, m)
    return float(m.mean_returns @ p.weights)


def portfolio_variance(p: Portfolio, m: MarketMoment) -> float:
    """Quadratic risk ``w' C w``; tiny negatives from round-off clamp to 0."""
    _check_dims(p, m)
    v = float(p.weights @ m.covariance @ p.weights)
    if v < 0.0:
        if v < -VARIANCE_CLAMP:
            raise ValueError(
                f"variance {v!r} negative beyond tolerance; covariance is not PSD"
            )
        v = 0.0
    return v


def hamiltonian(p: Portfolio, m: MarketMoment, lam: float) -> float:
    """Scalarized objective ``-lam * return + (1 - lam) * variance``."""
    lam = _check_lambda(lam)
    ret = portfolio_return(p, m)
    var = portfolio_variance(p, m)
    return lam * -ret + (1.0 - lam) * var


def magnetization(p: Portfolio) -> float:
    """Sum of weights, clamped to [-1, 1] to absorb summation round-off.

    +1 means fully long, -1 fully short; the unit L1 budget bounds it.
    """
    msum = float(np.sum(p.weights))
    return min(1.0, max(-1.0, msum))
