"""Command-line entry point: frontier sweeps, rolling scans, selftest.

Output is plot-ready CSV (default) or JSON. Floats are emitted with
``repr`` so re-parsing reproduces the in-memory values exactly, and all
output is deterministic for a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass

from .frontier import (
    FrontierCurve,
    LambdaGrid,
    detect_max_event,
    detect_zero_event,
    integrated_magnetization,
    sweep_frontier,
)
from .indicators import IndicatorSeries, carm, median_normalize, rolling_scan
from .ingest import (
    ParseError,
    compute_returns,
    estimate_moment,
    load_price_csv,
    resample_monthly,
    slice_window,
)
from .selftest import DEFAULT_SEED, run_selftest
from .solver import SolverConfig, SolverError


@dataclass(frozen=True)
class RunManifest:
    """Everything that determines one CLI run's output."""

    input_path: str
    window_months: int = 12
    lambda_points: int = 101
    carm_horizon: int = 12
    seed: int = 0
    restarts: int = 8
    output_format: str = "csv"
    output_path: str | None = None
    curves_path: str | None = None

    def __post_init__(self) -> None:
        if self.window_months < 2:
            raise ValueError("--window must be >= 2 months")
        if self.lambda_points < 2:
            raise ValueError("--lambda-points must be >= 2")
        if self.carm_horizon < 1:
            raise ValueError("--carm-n must be >= 1")
        if self.output_format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.output_format!r}")
        if self.restarts < 0:
            raise ValueError("--restarts must be >= 0")

    def solver_config(self) -> SolverConfig:
        return SolverConfig(random_restarts=self.restarts, rng_seed=self.seed)

    def lambda_grid(self) -> LambdaGrid:
        return LambdaGrid.uniform(self.lambda_points)


def _fmt(x: float) -> str:
    return repr(float(x))


def _manifest_comment(m: RunManifest) -> str:
    return (
        f"# manifest input={m.input_path} window={m.window_months} "
        f"lambda_points={m.lambda_points} carm_n={m.carm_horizon} "
        f"seed={m.seed} restarts={m.restarts}"
    )


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _frontier_csv(m: RunManifest, curve: FrontierCurve, end_date) -> str:
    lines = [
        _manifest_comment(m),
        f"# window_end={end_date.isoformat()}",
        "# summary integrated_m={} zero_event={} max_event={}".format(
            _fmt(integrated_magnetization(curve)),
            _fmt(detect_zero_event(curve)),
            _fmt(detect_max_event(curve)),
        ),
        "lambda,magnetization,hamiltonian,return,variance",
    ]
    for k in range(len(curve)):
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    curve.lambdas[k],
                    curve.magnetizations[k],
                    curve.hamiltonians[k],
                    curve.returns[k],
                    curve.variances[k],
                )
            )
        )
    return "\n".join(lines) + "\n"


def _frontier_json(m: RunManifest, curve: FrontierCurve, end_date) -> str:
    doc = {
        "manifest": asdict(m),
        "window_end": end_date.isoformat(),
        "summary": {
            "integrated_m": integrated_magnetization(curve),
            "zero_event": detect_zero_event(curve),
            "max_event": detect_max_event(curve),
        },
        "series": [
            {
                "lambda": float(curve.lambdas[k]),
                "magnetization": float(curve.magnetizations[k]),
                "hamiltonian": float(curve.hamiltonians[k]),
                "return": float(curve.returns[k]),
                "variance": float(curve.variances[k]),
            }
            for k in range(len(curve))
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def cmd_frontier(manifest: RunManifest) -> None:
    """Sweep the last full window of the input panel."""
    returns = compute_returns(resample_monthly(load_price_csv(manifest.input_path)))
    window = slice_window(returns, returns.n_rows - 1, manifest.window_months)
    curve = sweep_frontier(
        estimate_moment(window), manifest.lambda_grid(), manifest.solver_config()
    )
    end_date = window.dates[-1]
    if manifest.output_format == "json":
        text = _frontier_json(manifest, curve, end_date)
    else:
        text = _frontier_csv(manifest, curve, end_date)
    _write_text(manifest.output_path, text)


def _scan_rows(manifest: RunManifest, series: IndicatorSeries):
    carm_e = carm(series.zero_events, manifest.carm_horizon)
    carm_ep = carm(series.max_events, manifest.carm_horizon)
    carm_ep_norm, median_q = median_normalize(carm_ep)
    rows = []
    for k, p in enumerate(series.points):
        rows.append(
            (
                p.date,
                p.integrated_m,
                p.zero_event,
                p.max_event,
                float(carm_e[k]),
                float(carm_ep[k]),
                float(carm_ep_norm[k]),
            )
        )
    return rows, median_q


def _scan_csv(manifest: RunManifest, series: IndicatorSeries) -> str:
    rows, median_q = _scan_rows(manifest, series)
    q_text = "none" if median_q is None else _fmt(median_q)
    lines = [
        _manifest_comment(manifest),
        f"# carm_normalization median_q={q_text}",
        "date,M,E,E_prime,carm_E,carm_E_prime,carm_E_prime_normalized",
    ]
    for row in rows:
        lines.append(row[0].isoformat() + "," + ",".join(_fmt(v) for v in row[1:]))
    return "\n".join(lines) + "\n"


def _scan_json(manifest: RunManifest, series: IndicatorSeries) -> str:
    rows, median_q = _scan_rows(manifest, series)
    doc = {
        "manifest": asdict(manifest),
        "normalization": {"median_q": median_q},
        "series": [
            {
                "date": row[0].isoformat(),
                "M": row[1],
                "E": row[2],
                "E_prime": row[3],
                "carm_E": row[4],
                "carm_E_prime": row[5],
                "carm_E_prime_normalized": row[6],
            }
            for row in rows
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _curves_csv(manifest: RunManifest, series: IndicatorSeries, grid: LambdaGrid) -> str:
    lines = [
        _manifest_comment(manifest),
        "date," + ",".join(_fmt(v) for v in grid.values),
    ]
    for p in series.points:
        lines.append(
            p.date.isoformat() + ","
            + ",".join(_fmt(v) for v in p.magnetization_curve)
        )
    return "\n".join(lines) + "\n"


def _curves_json(manifest: RunManifest, series: IndicatorSeries, grid: LambdaGrid) -> str:
    doc = {
        "manifest": asdict(manifest),
        "lambdas": [float(v) for v in grid.values],
        "curves": [
            {
                "date": p.date.isoformat(),
                "magnetizations": [float(v) for v in p.magnetization_curve],
            }
            for p in series.points
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def cmd_scan(manifest: RunManifest) -> None:
    """Roll the window across the whole panel and post-process with CARM."""
    returns = compute_returns(resample_monthly(load_price_csv(manifest.input_path)))
    grid = manifest.lambda_grid()
    series = rolling_scan(
        returns,
        manifest.window_months,
        grid,
        manifest.solver_config(),
        keep_curves=manifest.curves_path is not None,
    )
    if manifest.output_format == "json":
        text = _scan_json(manifest, series)
    else:
        text = _scan_csv(manifest, series)
    _write_text(manifest.output_path, text)
    if manifest.curves_path is not None:
        if manifest.output_format == "json":
            curves_text = _curves_json(manifest, series, grid)
        else:
            curves_text = _curves_csv(manifest, series, grid)
        _write_text(manifest.curves_path, curves_text)


def cmd_selftest(seed: int, restarts: int) -> int:
    report = run_selftest(SolverConfig(random_restarts=restarts, rng_seed=0), seed=seed)
    for line in report.lines():
        print(line)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinfolio",
        description=(
            "Ground-state portfolio analytics: lambda-frontier sweeps, "
            "rolling magnetization indicators, and CARM post-processing."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_input: bool = True) -> None:
        if with_input:
            p.add_argument("--input", required=True, help="wide price CSV (date,asset,...)")
            p.add_argument("--window", type=int, default=12, metavar="MONTHS",
                           help="rolling window length in monthly return rows")
            p.add_argument("--lambda-points", type=int, default=101, metavar="N",
                           help="uniform lambda grid size including both endpoints")
            p.add_argument("--carm-n", type=int, default=12, metavar="N",
                           help="CARM horizon in months")
            p.add_argument("--format", choices=("csv", "json"), default="csv")
            p.add_argument("--output", default=None, metavar="PATH",
                           help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=None, help="solver RNG seed")
        p.add_argument("--restarts", type=int, default=8,
                       help="random sign-pattern restarts per solve")

    p_frontier = sub.add_parser("frontier", help="sweep the latest window")
    add_common(p_frontier)
    p_scan = sub.add_parser("scan", help="rolling scan with CARM columns")
    add_common(p_scan)
    p_scan.add_argument("--curves", default=None, metavar="PATH",
                        help="companion file with the per-date m(lambda) grid")
    p_selftest = sub.add_parser("selftest", help="run the built-in property checks")
    add_common(p_selftest, with_input=False)
    return parser


def _manifest_from_args(args: argparse.Namespace) -> RunManifest:
    return RunManifest(
        input_path=args.input,
        window_months=args.window,
        lambda_points=args.lambda_points,
        carm_horizon=args.carm_n,
        seed=0 if args.seed is None else args.seed,
        restarts=args.restarts,
        output_format=args.format,
        output_path=args.output,
        curves_path=getattr(args, "curves", None),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            seed = DEFAULT_SEED if args.seed is None else args.seed
            return cmd_selftest(seed, args.restarts)
        manifest = _manifest_from_args(args)
        if args.command == "frontier":
            cmd_frontier(manifest)
        else:
            cmd_scan(manifest)
        return 0
    except (ParseError, SolverError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
