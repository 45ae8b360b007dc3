"""Lambda sweeps and the scalar diagnostics read off them.

A frontier curve is the ground state traced over a grid of risk/return
trade-off weights. From the magnetization profile m(lambda) we extract:

* ``integrated_magnetization`` — trapezoidal integral of m over [0, 1],
* ``detect_zero_event``        — smallest lambda > 0 where m crosses 0,
* ``detect_max_event``         — smallest lambda where |m| peaks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import MarketMoment
from .model import magnetization, portfolio_return, portfolio_variance
from .solver import GroundState, SolverConfig, enumerate_exact, solve_ground_state

ZERO_TOL = 1e-9
PEAK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LambdaGrid:
    """Strictly increasing trade-off weights spanning [0, 1] exactly."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("lambda grid needs at least two points")
        if v[0] != 0.0 or v[-1] != 1.0:
            raise ValueError("lambda grid must start at 0.0 and end at 1.0")
        if not np.all(np.diff(v) > 0.0):
            raise ValueError("lambda grid must be strictly increasing")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls, points: int = 101) -> "LambdaGrid":
        if points < 2:
            raise ValueError("uniform grid needs at least two points")
        return cls(np.linspace(0.0, 1.0, points))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class FrontierCurve:
    """Ground states and their summary statistics along a lambda grid."""

    lambdas: np.ndarray
    magnetizations: np.ndarray
    returns: np.ndarray
    variances: np.ndarray
    hamiltonians: np.ndarray
    states: tuple[GroundState, ...]

    def __post_init__(self) -> None:
        k = self.lambdas.size
        for name in ("magnetizations", "returns", "variances", "hamiltonians"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (k,):
                raise ValueError(f"{name} must have one entry per lambda")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if len(self.states) != k:
            raise ValueError("states must have one entry per lambda")

    def __len__(self) -> int:
        return self.lambdas.size


def sweep_frontier(
    m: MarketMoment,
    grid: LambdaGrid | None = None,
    cfg: SolverConfig | None = None,
    solver: str = "heuristic",
) -> FrontierCurve:
    """Solve the ground state at every grid point, warm-starting each
    lambda from the previous optimum's sign pattern."""
    grid = grid or LambdaGrid.uniform()
    cfg = cfg or SolverConfig()
    if solver not in ("heuristic", "exact"):
        raise ValueError(f"unknown solver {solver!r}, expected heuristic|exact")
    states: list[GroundState] = []
    prev_pattern = None
    for lam in grid.values:
        if solver == "exact":
            gs = enumerate_exact(m, float(lam), cfg)
        else:
            extra = () if prev_pattern is None else (prev_pattern,)
            gs = solve_ground_state(m, float(lam), cfg, extra_seeds=extra)
        prev_pattern = gs.sign_pattern
        states.append(gs)
    mags = np.array([magnetization(s.portfolio) for s in states])
    rets = np.array([portfolio_return(s.portfolio, m) for s in states])
    variances = np.array([portfolio_variance(s.portfolio, m) for s in states])
    hams = np.array([s.hamiltonian_value for s in states])
    return FrontierCurve(grid.values, mags, rets, variances, hams, tuple(states))


def integrated_magnetization(curve: FrontierCurve) -> float:
    """Trapezoidal integral of m(lambda) over [0, 1]; always in [-1, 1]."""
    total = float(np.trapezoid(curve.magnetizations, curve.lambdas))
    return min(1.0, max(-1.0, total))


@dataclass(frozen=True)
class EventOutcome:
    """The two cursor events of one curve; 0.0 encodes "no event"."""

    zero_event: float
    max_event: float

    def __post_init__(self) -> None:
        for name in ("zero_event", "max_event"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")


def zero_crossings(curve: FrontierCurve) -> list[float]:
    """All lambda > 0 where m vanishes, smallest first.

    Grid points with |m| <= ZERO_TOL count as exact zeros; sign changes
    between adjacent grid points are located by linear interpolation.
    """
    lam = curve.lambdas
    mag = curve.magnetizations
    out: list[float] = []
    for k in range(lam.size):
        if lam[k] > 0.0 and abs(mag[k]) <= ZERO_TOL:
            out.append(float(lam[k]))
        if k + 1 < lam.size and abs(mag[k]) > ZERO_TOL and abs(mag[k + 1]) > ZERO_TOL:
            if mag[k] * mag[k + 1] < 0.0:
                t = mag[k] / (mag[k] - mag[k + 1])
                out.append(float(lam[k] + t * (lam[k + 1] - lam[k])))
    out.sort()
    return out


def detect_zero_event(curve: FrontierCurve) -> float:
    """Smallest lambda > 0 with zero magnetization, or 0.0 if none."""
    crossings = zero_crossings(curve)
    return crossings[0] if crossings else 0.0


def detect_max_event(curve: FrontierCurve) -> float:
    """Smallest lambda where |m| attains its maximum, or 0.0 for flat-zero m."""
    absmag = np.abs(curve.magnetizations)
    peak = float(absmag.max())
    if peak == 0.0:
        return 0.0
    k = int(np.flatnonzero(absmag >= peak - PEAK_TOL)[0])
    return float(curve.lambdas[k])


def detect_events(curve: FrontierCurve) -> EventOutcome:
    return EventOutcome(detect_zero_event(curve), detect_max_event(curve))
