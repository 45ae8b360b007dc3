"""Built-in diagnostics: property checks the solvers must satisfy.

Each property runs on freshly generated random instances and reports
PASS or FAIL with a short detail string. Exceptions are caught and
reported as failures of the property that raised them, so a broken or
mis-configured solver shows up by name instead of crashing the run.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .frontier import (
    LambdaGrid,
    detect_max_event,
    detect_zero_event,
    integrated_magnetization,
    sweep_frontier,
)
from .indicators import carm
from .ingest import MarketMoment, ReturnPanel, estimate_moment
from .model import Portfolio, hamiltonian
from .solver import SolverConfig, enumerate_exact, grid_oracle, solve_ground_state

DEFAULT_SEED = 20240801


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


@dataclass(frozen=True)
class SelfTestReport:
    results: tuple[PropertyResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list[str]:
        out = [r.line() for r in self.results]
        n_fail = sum(not r.passed for r in self.results)
        out.append(
            f"{len(self.results) - n_fail}/{len(self.results)} properties passed"
        )
        return out


def month_sequence(n_rows: int, start_year: int = 2015) -> tuple[dt.date, ...]:
    """Consecutive month-end-ish dates (28th) for synthetic panels."""
    dates = []
    y, m = start_year, 1
    for _ in range(n_rows):
        dates.append(dt.date(y, m, 28))
        m += 1
        if m > 12:
            y, m = y + 1, 1
    return tuple(dates)


def random_return_panel(
    rng: np.random.Generator, n_assets: int, rows: int = 24
) -> ReturnPanel:
    """Synthetic monthly returns with mild cross-correlation."""
    common = rng.normal(0.0, 0.02, size=(rows, 1))
    idio = rng.normal(0.0, 0.04, size=(rows, n_assets))
    drift = rng.normal(0.0, 0.01, size=n_assets)
    rets = drift + common + idio
    assets = tuple(f"A{i}" for i in range(n_assets))
    return ReturnPanel(month_sequence(rows), assets, rets)


def random_moment(rng: np.random.Generator, n_assets: int, rows: int = 24) -> MarketMoment:
    return estimate_moment(random_return_panel(rng, n_assets, rows))


def _random_l1_portfolio(rng: np.random.Generator, n: int) -> Portfolio:
    w = rng.uniform(-1.0, 1.0, size=n)
    while np.sum(np.abs(w)) < 1e-9:  # pragma: no cover - essentially impossible
        w = rng.uniform(-1.0, 1.0, size=n)
    return Portfolio(w / np.sum(np.abs(w)))


def _check_oracle_equivalence(cfg: SolverConfig, rng: np.random.Generator) -> str:
    worst = 0.0
    count = 0
    for k in range(24):
        n = 2 + k % 7
        m = random_moment(rng, n)
        for lam in (0.0, float(rng.uniform()), 1.0):
            h_heur = solve_ground_state(m, lam, cfg).hamiltonian_value
            h_exact = enumerate_exact(m, lam, cfg).hamiltonian_value
            gap = abs(h_heur - h_exact)
            tol = 1e-8 * abs(h_exact) + 1e-12
            worst = max(worst, gap / tol if tol > 0 else gap)
            count += 1
            if gap > tol:
                raise AssertionError(
                    f"heuristic {h_heur!r} vs exact {h_exact!r} at lambda={lam:.4f}, N={n}"
                )
    return f"{count} solves, worst gap at {worst:.2e} of tolerance"


def _check_grid_oracle_bound(cfg: SolverConfig, rng: np.random.Generator) -> str:
    resolution = 150
    worst = 0.0
    for k in range(8):
        n = 2 + k % 2
        m = random_moment(rng, n)
        lam = (0.0, 0.5, 1.0, float(rng.uniform()))[k % 4]
        h_exact = enumerate_exact(m, lam, cfg).hamiltonian_value
        h_grid = grid_oracle(m, lam, resolution).hamiltonian_value
        diff = h_grid - h_exact
        if diff < -1e-9:
            raise AssertionError(f"grid beat the exact solver by {-diff:.3e}")
        scale = np.max(np.abs(m.mean_returns)) + 2.0 * np.max(np.abs(m.covariance))
        bound = 3.0 * scale * n / resolution
        if diff > bound:
            raise AssertionError(f"discretization gap {diff:.3e} exceeds bound {bound:.3e}")
        worst = max(worst, diff)
    return f"max discretization gap {worst:.2e} at resolution {resolution}"


def _check_lambda_one_closed_form(cfg: SolverConfig, rng: np.random.Generator) -> str:
    for k in range(20):
        n = 2 + k % 9
        m = random_moment(rng, n)
        gs = solve_ground_state(m, 1.0, cfg)
        j = int(np.argmax(np.abs(m.mean_returns)))
        expected = np.zeros(n)
        expected[j] = 1.0 if m.mean_returns[j] >= 0 else -1.0
        if not np.array_equal(gs.portfolio.weights, expected):
            raise AssertionError(
                f"lambda=1 weights {gs.portfolio.weights} != sign(R_k) e_k for k={j}"
            )
    return "20 instances hit sign(R_k) e_k exactly"


def _check_budget_constraint(cfg: SolverConfig, rng: np.random.Generator) -> str:
    worst = 0.0
    for k in range(20):
        n = 2 + k % 9
        m = random_moment(rng, n)
        lam = float(rng.uniform())
        states = [solve_ground_state(m, lam, cfg)]
        if n <= cfg.oracle_asset_limit:
            states.append(enumerate_exact(m, lam, cfg))
        for gs in states:
            worst = max(worst, abs(float(np.sum(np.abs(gs.portfolio.weights))) - 1.0))
    if worst > 1e-10:
        raise AssertionError(f"budget violation {worst:.3e}")
    return f"max |sum|w|-1| = {worst:.2e}"


def _check_frontier_monotonicity(cfg: SolverConfig, rng: np.random.Generator) -> str:
    grid = LambdaGrid.uniform(21)
    for k in range(4):
        n = 3 + k % 4
        m = random_moment(rng, n)
        curve = sweep_frontier(m, grid, cfg, solver="exact")
        if np.any(np.diff(curve.returns) < -1e-9):
            raise AssertionError("portfolio return decreased along lambda")
        if np.any(np.diff(curve.variances) < -1e-9):
            raise AssertionError("portfolio variance decreased along lambda")
    return "returns and variances nondecreasing on 4 exact sweeps"


def _check_antisymmetry(cfg: SolverConfig, rng: np.random.Generator) -> str:
    grid = LambdaGrid.uniform(21)
    step = 1.0 / 20.0
    worst = 0.0
    for k in range(6):
        n = 3 + k % 4
        m = random_moment(rng, n)
        flipped = MarketMoment(n, -m.mean_returns, m.covariance, m.assets)
        a = sweep_frontier(m, grid, cfg, solver="exact")
        b = sweep_frontier(flipped, grid, cfg, solver="exact")
        gap = float(np.max(np.abs(a.magnetizations + b.magnetizations)))
        worst = max(worst, gap)
        if gap > 1e-8:
            raise AssertionError(f"m(lambda) not negated, max gap {gap:.3e}")
        if abs(integrated_magnetization(a) + integrated_magnetization(b)) > 1e-8:
            raise AssertionError("integrated magnetization not negated")
        if abs(detect_zero_event(a) - detect_zero_event(b)) > step + 1e-12:
            raise AssertionError("zero event moved by more than one grid step")
        if abs(detect_max_event(a) - detect_max_event(b)) > step + 1e-12:
            raise AssertionError("max event moved by more than one grid step")
    return f"6 mirrored sweeps, max pointwise gap {worst:.2e}"


def _check_magnetization_bounds(cfg: SolverConfig, rng: np.random.Generator) -> str:
    grid = LambdaGrid.uniform(11)
    for k in range(40):
        n = 2 + k % 9
        m = random_moment(rng, n)
        curve = sweep_frontier(m, grid, cfg)
        if np.any(curve.magnetizations < -1.0) or np.any(curve.magnetizations > 1.0):
            raise AssertionError("magnetization escaped [-1, 1]")
        big_m = integrated_magnetization(curve)
        if not -1.0 <= big_m <= 1.0:
            raise AssertionError(f"integrated magnetization escaped [-1, 1]: {big_m!r}")
    return "40 sweeps stayed inside [-1, 1] with no tolerance"


def _check_random_portfolio_bound(cfg: SolverConfig, rng: np.random.Generator) -> str:
    for k in range(5):
        n = 2 + k % 7
        m = random_moment(rng, n)
        lam = float(rng.uniform())
        h_best = solve_ground_state(m, lam, cfg).hamiltonian_value
        for _ in range(1000):
            p = _random_l1_portfolio(rng, n)
            if hamiltonian(p, m, lam) < h_best - 1e-12:
                raise AssertionError("random portfolio beat the solver")
    return "solver at or below 5x1000 random feasible portfolios"


def _check_carm_closed_form(cfg: SolverConfig, rng: np.random.Generator) -> str:
    for n in (1, 2, 5, 12):
        series = np.ones(3 * n + 5)
        harmonic = float(np.sum(1.0 / np.arange(1, n + 1)))
        expected = 1.0 + harmonic / n
        tail = carm(series, n)[n:]
        gap = float(np.max(np.abs(tail - expected)))
        if gap > 1e-12:
            raise AssertionError(f"constant-series value off by {gap:.3e} at N={n}")
    spike = np.zeros(6)
    spike[0] = 1.0
    if abs(carm(spike, 2)[0] - 0.75) > 1e-12:
        raise AssertionError("unit spike at the series start should read 0.75 at N=2")
    return "matches c*(1 + H_N/N) for N in {1, 2, 5, 12}"


def _check_carm_linearity(cfg: SolverConfig, rng: np.random.Generator) -> str:
    worst = 0.0
    for _ in range(10):
        x = rng.normal(size=30)
        y = rng.normal(size=30)
        a, b = rng.normal(size=2)
        lhs = carm(a * x + b * y, 12)
        rhs = a * carm(x, 12) + b * carm(y, 12)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    if worst > 1e-12:
        raise AssertionError(f"linearity gap {worst:.3e}")
    return f"10 random pairs, max gap {worst:.2e}"


_PROPERTIES = (
    ("oracle_equivalence", _check_oracle_equivalence),
    ("grid_oracle_bound", _check_grid_oracle_bound),
    ("lambda_one_closed_form", _check_lambda_one_closed_form),
    ("budget_constraint", _check_budget_constraint),
    ("frontier_monotonicity", _check_frontier_monotonicity),
    ("antisymmetry", _check_antisymmetry),
    ("magnetization_bounds", _check_magnetization_bounds),
    ("random_portfolio_bound", _check_random_portfolio_bound),
    ("carm_closed_form", _check_carm_closed_form),
    ("carm_linearity", _check_carm_linearity),
)


def run_selftest(
    cfg: SolverConfig | None = None, seed: int = DEFAULT_SEED
) -> SelfTestReport:
    """Run every property with a deterministic per-property RNG."""
    cfg = cfg or SolverConfig()
    results = []
    for offset, (name, check) in enumerate(_PROPERTIES):
        rng = np.random.default_rng(seed + offset)
        try:
            detail = check(cfg, rng)
            results.append(PropertyResult(name, True, detail))
        except Exception as exc:
            results.append(PropertyResult(name, False, f"{type(exc).__name__}: {exc}"))
    return SelfTestReport(tuple(results))
