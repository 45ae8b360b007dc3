"""Ground-state portfolio analytics on the L1 budget sphere.

The pipeline: price panels -> monthly returns -> rolling window moments
-> per-lambda ground-state portfolios -> magnetization curve m(lambda)
-> integrated magnetization M, cursor events E and E', and the CARM
memory indicator.
"""

from .frontier import (
    EventOutcome,
    FrontierCurve,
    LambdaGrid,
    detect_events,
    detect_max_event,
    detect_zero_event,
    integrated_magnetization,
    sweep_frontier,
    zero_crossings,
)
from .indicators import (
    CarmConfig,
    IndicatorPoint,
    IndicatorSeries,
    carm,
    carm_series,
    median_normalize,
    rolling_scan,
)
from .ingest import (
    MarketMoment,
    ParseError,
    PricePanel,
    ReturnPanel,
    compute_returns,
    estimate_moment,
    load_price_csv,
    parse_price_table,
    resample_monthly,
    slice_window,
)
from .model import (
    Portfolio,
    hamiltonian,
    magnetization,
    portfolio_return,
    portfolio_variance,
    validate_budget,
)
from .selftest import SelfTestReport, run_selftest
from .solver import (
    GroundState,
    SolverConfig,
    SolverError,
    enumerate_exact,
    grid_oracle,
    solve_ground_state,
    solve_orthant,
)

__version__ = "0.1.0"

__all__ = [
    "CarmConfig",
    "EventOutcome",
    "FrontierCurve",
    "GroundState",
    "IndicatorPoint",
    "IndicatorSeries",
    "LambdaGrid",
    "MarketMoment",
    "ParseError",
    "Portfolio",
    "PricePanel",
    "ReturnPanel",
    "SelfTestReport",
    "SolverConfig",
    "SolverError",
    "carm",
    "carm_series",
    "compute_returns",
    "detect_events",
    "detect_max_event",
    "detect_zero_event",
    "enumerate_exact",
    "estimate_moment",
    "grid_oracle",
    "hamiltonian",
    "integrated_magnetization",
    "load_price_csv",
    "magnetization",
    "median_normalize",
    "parse_price_table",
    "portfolio_return",
    "portfolio_variance",
    "resample_monthly",
    "rolling_scan",
    "run_selftest",
    "slice_window",
    "solve_ground_state",
    "solve_orthant",
    "sweep_frontier",
    "validate_budget",
    "zero_crossings",
]
