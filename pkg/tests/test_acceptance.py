"""End-to-end acceptance gate.

Each test checks one numbered claim about the system at its stated
tolerance and prints a single PASS/FAIL scoreboard line (bypassing
pytest's capture), then asserts. Run the whole file to get a ten-line
scoreboard plus the usual pytest verdicts.
"""

import os
import subprocess
import sys
import time

import numpy as np

from spinfolio.frontier import (
    LambdaGrid,
    detect_max_event,
    detect_zero_event,
    integrated_magnetization,
    sweep_frontier,
)
from spinfolio.indicators import carm, rolling_scan
from spinfolio.ingest import MarketMoment, ReturnPanel
from spinfolio.selftest import month_sequence, random_moment
from spinfolio.solver import (
    SolverConfig,
    enumerate_exact,
    grid_oracle,
    solve_ground_state,
    solve_orthant,
)
from conftest import price_csv_text, synthetic_prices


def emit(capsys, num, name, ok, detail):
    line = f"criterion {num:02d} {'PASS' if ok else 'FAIL'} {name}: {detail}"
    with capsys.disabled():
        print(line)


def relative_gap(h, h_ref):
    d = abs(h - h_ref)
    if d == 0.0:
        return 0.0
    return d / abs(h_ref) if h_ref != 0.0 else float("inf")


def test_criterion_01_oracle_equivalence(capsys):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for i in range(100):
        n = int(rng.integers(2, 9))
        m = random_moment(rng, n, rows=24)
        if i == 0:
            lam = 0.0
        elif i == 1:
            lam = 1.0
        else:
            lam = float(rng.uniform(0.0, 1.0))
        heur = solve_ground_state(m, lam)
        exact = enumerate_exact(m, lam)
        worst = max(
            worst, relative_gap(heur.hamiltonian_value, exact.hamiltonian_value)
        )
        count += 1
    elapsed = time.perf_counter() - t0
    ok = count >= 100 and worst <= 1e-8 and elapsed < 30.0
    emit(
        capsys, 1, "oracle equivalence", ok,
        f"{count} instances, worst relative gap {worst:.3e}, {elapsed:.1f}s",
    )
    assert count >= 100
    assert worst <= 1e-8
    assert elapsed < 30.0


def test_criterion_02_grid_oracle_consistency(capsys):
    rng = np.random.default_rng(202)
    worst = -np.inf
    lowest = np.inf
    for _ in range(25):
        n = int(rng.integers(2, 4))
        m = random_moment(rng, n)
        lam = float(rng.uniform(0.0, 1.0))
        exact = enumerate_exact(m, lam)
        grid = grid_oracle(m, lam, resolution=200)
        diff = grid.hamiltonian_value - exact.hamiltonian_value
        worst = max(worst, diff)
        lowest = min(lowest, diff)
    ok = worst < 5e-3 and lowest >= -1e-9
    emit(
        capsys, 2, "grid-oracle consistency", ok,
        f"25 instances at resolution 200, grid-exact in [{lowest:.2e}, {worst:.2e}]",
    )
    assert worst < 5e-3
    assert lowest >= -1e-9


def test_criterion_03_lambda_one_closed_form(capsys):
    rng = np.random.default_rng(303)
    exact_hits = 0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        base = random_moment(rng, n)
        returns = rng.normal(0.0, 0.03, size=n)
        m = MarketMoment(n, returns, base.covariance)
        k = int(np.argmax(np.abs(returns)))
        expected = np.zeros(n)
        expected[k] = np.sign(returns[k])
        heur = solve_ground_state(m, 1.0)
        exact = enumerate_exact(m, 1.0)
        if np.array_equal(heur.portfolio.weights, expected) and np.array_equal(
            exact.portfolio.weights, expected
        ):
            exact_hits += 1
    ok = exact_hits == 50
    emit(
        capsys, 3, "lambda=1 closed form", ok,
        f"{exact_hits}/50 instances equal sign(R_k) e_k exactly",
    )
    assert exact_hits == 50


def test_criterion_04_constraint_fidelity(capsys):
    rng = np.random.default_rng(404)
    worst = 0.0

    def check(portfolio):
        nonlocal worst
        worst = max(worst, abs(float(np.sum(np.abs(portfolio.weights))) - 1.0))

    count = 0
    for _ in range(20):
        n = int(rng.integers(2, 7))
        m = random_moment(rng, n)
        lam = float(rng.uniform(0.0, 1.0))
        check(solve_ground_state(m, lam).portfolio)
        check(enumerate_exact(m, lam).portfolio)
        signs = np.where(rng.integers(0, 2, size=n) == 1, -1.0, 1.0)
        check(solve_orthant(signs, m, lam).portfolio)
        count += 3
        if n <= 4:
            check(grid_oracle(m, lam, 60).portfolio)
            count += 1
    for _ in range(4):
        m = random_moment(rng, int(rng.integers(2, 7)))
        for curve in (
            sweep_frontier(m, LambdaGrid.uniform(11)),
            sweep_frontier(m, LambdaGrid.uniform(11), solver="exact"),
        ):
            for state in curve.states:
                check(state.portfolio)
                count += 1
    ok = worst <= 1e-10
    emit(
        capsys, 4, "constraint fidelity", ok,
        f"{count} portfolios, max |sum|w|-1| = {worst:.3e}",
    )
    assert worst <= 1e-10


def test_criterion_05_frontier_monotonicity(capsys):
    rng = np.random.default_rng(505)
    grid = LambdaGrid.uniform(101)
    worst_ret = np.inf
    worst_var = np.inf
    for _ in range(8):
        n = int(rng.integers(2, 7))
        m = random_moment(rng, n)
        curve = sweep_frontier(m, grid, solver="exact")
        worst_ret = min(worst_ret, float(np.min(np.diff(curve.returns))))
        worst_var = min(worst_var, float(np.min(np.diff(curve.variances))))
    ok = worst_ret >= -1e-9 and worst_var >= -1e-9
    emit(
        capsys, 5, "frontier monotonicity", ok,
        f"8 exact 101-point sweeps, min return step {worst_ret:.2e}, "
        f"min variance step {worst_var:.2e}",
    )
    assert worst_ret >= -1e-9
    assert worst_var >= -1e-9


def test_criterion_06_antisymmetry(capsys):
    rng = np.random.default_rng(606)
    grid = LambdaGrid.uniform(101)
    step = 1.0 / 100.0
    worst_m = 0.0
    worst_big_m = 0.0
    worst_event = 0.0
    for _ in range(8):
        n = int(rng.integers(2, 7))
        m = random_moment(rng, n)
        mirrored = MarketMoment(n, -m.mean_returns, m.covariance)
        a = sweep_frontier(m, grid, solver="exact")
        b = sweep_frontier(mirrored, grid, solver="exact")
        worst_m = max(
            worst_m, float(np.max(np.abs(a.magnetizations + b.magnetizations)))
        )
        worst_big_m = max(
            worst_big_m,
            abs(integrated_magnetization(a) + integrated_magnetization(b)),
        )
        worst_event = max(
            worst_event,
            abs(detect_zero_event(a) - detect_zero_event(b)),
            abs(detect_max_event(a) - detect_max_event(b)),
        )
    ok = worst_m <= 1e-8 and worst_big_m <= 1e-8 and worst_event <= step + 1e-12
    emit(
        capsys, 6, "antisymmetry", ok,
        f"8 mirrored exact sweeps, max |m+m'| {worst_m:.2e}, "
        f"max |M+M'| {worst_big_m:.2e}, max event shift {worst_event:.3f}",
    )
    assert worst_m <= 1e-8
    assert worst_big_m <= 1e-8
    assert worst_event <= step + 1e-12


def test_criterion_07_magnetization_bounds(capsys):
    rng = np.random.default_rng(707)
    grid = LambdaGrid.uniform(11)
    worst_m = 0.0
    worst_big_m = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        m = random_moment(rng, n, rows=16)
        curve = sweep_frontier(m, grid)
        worst_m = max(worst_m, float(np.max(np.abs(curve.magnetizations))))
        worst_big_m = max(worst_big_m, abs(integrated_magnetization(curve)))
    ok = worst_m <= 1.0 and worst_big_m <= 1.0
    emit(
        capsys, 7, "magnetization bounds", ok,
        f"1000 instances, max |m| = {worst_m!r}, max |M| = {worst_big_m!r}",
    )
    assert worst_m <= 1.0
    assert worst_big_m <= 1.0


def test_criterion_08_carm_closed_form(capsys):
    worst_const = 0.0
    for n in (1, 2, 5, 12):
        out = carm(np.ones(48), horizon_n=n)
        expected = 1.0 + sum(1.0 / i for i in range(1, n + 1)) / n
        worst_const = max(worst_const, float(np.max(np.abs(out[n:] - expected))))
    two = carm(np.ones(10), horizon_n=2)
    worst_const = max(worst_const, abs(float(two[-1]) - 1.75))
    rng = np.random.default_rng(808)
    worst_lin = 0.0
    for _ in range(10):
        u = rng.normal(size=36)
        v = rng.normal(size=36)
        a, b = rng.normal(size=2)
        gap = carm(a * u + b * v, 12) - (a * carm(u, 12) + b * carm(v, 12))
        worst_lin = max(worst_lin, float(np.max(np.abs(gap))))
    ok = worst_const <= 1e-12 and worst_lin <= 1e-12
    emit(
        capsys, 8, "CARM closed form", ok,
        f"constant gap {worst_const:.2e} (N in 1,2,5,12; N=2 -> 1.75), "
        f"linearity gap {worst_lin:.2e}",
    )
    assert worst_const <= 1e-12
    assert worst_lin <= 1e-12


def test_criterion_09_synthetic_regime_switch(capsys):
    rng = np.random.default_rng(909)
    n = 6
    means = np.where(np.arange(120)[:, None] < 60, 0.02, -0.02)
    rets = means + rng.normal(0.0, 0.02, size=(120, n))
    panel = ReturnPanel(
        month_sequence(120), tuple(f"A{i}" for i in range(n)), rets
    )
    series = rolling_scan(panel, 12, LambdaGrid.uniform(101), solver="exact")
    m_series = series.integrated_m
    assert len(series) == 109
    # window ending at return row e covers rows e-11..e (0-based); rows
    # 0..59 are bullish months 1..60, rows 60..119 bearish months 61..120
    ends = np.arange(11, 120)
    bull = m_series[ends <= 59]
    bear = m_series[ends >= 71]
    flips = [
        int(ends[i])
        for i in range(len(m_series) - 1)
        if m_series[i] * m_series[i + 1] < 0.0
    ]
    in_band = all(59 <= e <= 70 for e in flips)
    ok = bool(np.all(bull > 0.0) and np.all(bear < 0.0) and flips and in_band)
    emit(
        capsys, 9, "synthetic regime switch", ok,
        f"{bull.size} bull windows M>0, {bear.size} bear windows M<0, "
        f"zero-crossings after month(s) {[e + 1 for e in flips]}",
    )
    assert np.all(bull > 0.0)
    assert np.all(bear < 0.0)
    assert flips
    assert in_band


def test_criterion_10_full_scale_performance(capsys, tmp_path):
    rng = np.random.default_rng(42)
    dates, prices = synthetic_prices(rng, n_assets=30, n_price_rows=181)
    csv_path = tmp_path / "panel.csv"
    csv_path.write_text(price_csv_text(dates, prices), encoding="utf-8")
    env = dict(os.environ)
    env.update(
        OMP_NUM_THREADS="1",
        MKL_NUM_THREADS="1",
        OPENBLAS_NUM_THREADS="1",
        NUMBA_NUM_THREADS="1",
    )
    outputs = []
    elapsed = []
    for run in (1, 2):
        out = tmp_path / f"scan{run}.csv"
        cmd = [
            sys.executable, "-m", "spinfolio", "scan",
            "--input", str(csv_path), "--window", "12",
            "--lambda-points", "101", "--seed", "0", "--output", str(out),
        ]
        t0 = time.perf_counter()
        proc = subprocess.run(cmd, capture_output=True, text=True, env=env)
        elapsed.append(time.perf_counter() - t0)
        assert proc.returncode == 0, proc.stderr
        outputs.append(out.read_bytes())
    rows = [
        ln for ln in outputs[0].decode("utf-8").splitlines()
        if ln and not ln.startswith("#")
    ]
    n_points = len(rows) - 1
    identical = outputs[0] == outputs[1]
    ok = elapsed[0] < 120.0 and identical and n_points == 169
    emit(
        capsys, 10, "full-scale performance", ok,
        f"30 assets, 180 return rows, 101 lambdas: {elapsed[0]:.1f}s and "
        f"{elapsed[1]:.1f}s, {n_points} rows, byte-identical={identical}",
    )
    assert elapsed[0] < 120.0
    assert identical
    assert n_points == 169
