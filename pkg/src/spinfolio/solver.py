"""Ground-state portfolio solvers for the scalarized objective.

Three routes with one contract:

* ``solve_ground_state`` — production heuristic: per-orthant convex QP
  plus sign-flip local search from a deterministic seed set.
* ``enumerate_exact``   — exact oracle: solves every one of the 2^N
  orthants (guarded by an asset limit).
* ``grid_oracle``       — independent brute force on a weight grid; no
  shared machinery with the other two, used to sanity-check both.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import _qp
from .ingest import MarketMoment
from .model import Portfolio, _check_lambda, hamiltonian

HEURISTIC = "heuristic"
ORTHANT_EXACT = "orthant_exact"
GRID_ORACLE = "grid_oracle"

_TIE_TOL = 1e-12


class SolverError(RuntimeError):
    """Raised when a solve cannot certify its KKT conditions."""


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the heuristic and the exact oracle."""

    random_restarts: int = 8
    rng_seed: int = 0
    kkt_tolerance: float = 1e-9
    max_sign_flips: int = 200
    oracle_asset_limit: int = 12

    def __post_init__(self) -> None:
        if self.random_restarts < 0:
            raise ValueError("random_restarts must be >= 0")
        if self.kkt_tolerance <= 0.0:
            raise ValueError("kkt_tolerance must be > 0")
        if self.max_sign_flips < 0:
            raise ValueError("max_sign_flips must be >= 0")
        if self.oracle_asset_limit < 1:
            raise ValueError("oracle_asset_limit must be >= 1")


@dataclass(frozen=True, eq=False)
class GroundState:
    """Optimal portfolio for one (moment, lambda) pair."""

    portfolio: Portfolio
    hamiltonian_value: float
    lam: float
    method: str
    sign_pattern: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.sign_pattern is not None:
            s = np.ascontiguousarray(self.sign_pattern, dtype=np.float64)
            s.flags.writeable = False
            object.__setattr__(self, "sign_pattern", s)

    @property
    def magnetization(self) -> float:
        from .model import magnetization

        return magnetization(self.portfolio)


def _check_signs(signs, n: int) -> np.ndarray:
    s = np.ascontiguousarray(signs, dtype=np.float64)
    if s.shape != (n,):
        raise ValueError(f"sign pattern shape {s.shape}, expected ({n},)")
    if not np.all(np.abs(s) == 1.0):
        raise ValueError("sign pattern entries must be +1 or -1")
    return s


def _qp_max_iter(n: int) -> int:
    return 200 + 20 * n

def _finish(
    m: MarketMoment, lam: float, signs: np.ndarray, x: np.ndarray, method: str
) -> GroundState:
    p = Portfolio(signs * x)
    return GroundState(p, hamiltonian(p, m, lam), lam, method, signs)


def solve_orthant(
    signs, m: MarketMoment, lam: float, cfg: SolverConfig | None = None
) -> GroundState:
    """Exact minimizer within one sign orthant of the L1 sphere."""
    cfg = cfg or SolverConfig()
    lam = _check_lambda(lam)
    s = _check_signs(signs, m.asset_count)
    x, _, _, res, _ = _qp._orthant_qp(
        m.covariance, m.mean_returns, lam, s, _qp_max_iter(m.asset_count)
    )
    if res > cfg.kkt_tolerance:
        raise SolverError(
            f"orthant QP failed to certify KKT: residual {res:.3e} > "
            f"{cfg.kkt_tolerance:.3e} (covariance may not be PSD)"
        )
    return _finish(m, lam, s, x, ORTHANT_EXACT)


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    # + sorts before - at the first differing asset
    for sa, sb in zip(a, b):
        if sa != sb:
            return sa > sb
    return False


def _better(
    cand: tuple[float, float, np.ndarray, np.ndarray],
    best: tuple[float, float, np.ndarray, np.ndarray],
) -> bool:
    h, ret, signs = cand[0], cand[1], cand[2]
    bh, bret, bsigns = best[0], best[1], best[2]
    if h < bh - _TIE_TOL:
        return True
    if h > bh + _TIE_TOL:
        return False
    if ret > bret + _TIE_TOL:
        return True
    if ret < bret - _TIE_TOL:
        return False
    return _lex_less(signs, bsigns)


def _seed_patterns(
    m: MarketMoment, cfg: SolverConfig, extra_seeds=()
) -> list[np.ndarray]:
    n = m.asset_count
    seeds = [
        np.where(m.mean_returns < 0.0, -1.0, 1.0),  # sign(R), zeros -> +
        np.ones(n),
        -np.ones(n),
    ]
    rng = np.random.default_rng(cfg.rng_seed)
    for _ in range(cfg.random_restarts):
        seeds.append(np.where(rng.integers(0, 2, size=n) == 1, -1.0, 1.0))
    for extra in extra_seeds:
        seeds.append(_check_signs(extra, n))
    unique: list[np.ndarray] = []
    seen: set[tuple[float, ...]] = set()
    for s in seeds:
        key = tuple(s)
        if key not in seen:
            seen.add(key)
            unique.append(np.ascontiguousarray(s))
    return unique


def solve_ground_state(
    m: MarketMoment,
    lam: float,
    cfg: SolverConfig | None = None,
    extra_seeds=(),
) -> GroundState:
    """Best portfolio over the whole L1 sphere found by sign-flip local search.

    Deterministic for a fixed ``cfg.rng_seed``. Ties resolve to the lower
    Hamiltonian, then the higher return, then the lexicographically
    earliest sign pattern with + preferred. ``extra_seeds`` lets callers
    (the frontier sweep) warm-start from a neighboring solution.
    """
    cfg = cfg or SolverConfig()
    lam = _check_lambda(lam)
    n = m.asset_count
    cache = _qp.new_cache()
    use_cache = n <= 62
    max_iter = _qp_max_iter(n)
    best: tuple[float, float, np.ndarray, np.ndarray] | None = None
    worst_res = 0.0
    for seed in _seed_patterns(m, cfg, extra_seeds):
        signs, x, h, ret, res, _ = _qp._local_search(
            m.covariance,
            m.mean_returns,
            lam,
            seed,
            cfg.max_sign_flips,
            max_iter,
            cache,
            use_cache,
        )
        worst_res = max(worst_res, res)
        cand = (h, ret, signs, x)
        if best is None or _better(cand, best):
            best = cand
    if worst_res > cfg.kkt_tolerance:
        raise SolverError(
            f"ground-state search failed to certify KKT: residual "
            f"{worst_res:.3e} > {cfg.kkt_tolerance:.3e}"
        )
    assert best is not None
    return _finish(m, lam, best[2], best[3], HEURISTIC)


def enumerate_exact(
    m: MarketMoment, lam: float, cfg: SolverConfig | None = None
) -> GroundState:
    """Global optimum by solving all 2^N orthants; N capped by config."""
    cfg = cfg or SolverConfig()
    lam = _check_lambda(lam)
    n = m.asset_count
    if n > cfg.oracle_asset_limit:
        raise ValueError(
            f"enumerate_exact: {n} assets exceeds oracle_asset_limit "
            f"{cfg.oracle_asset_limit} (2^N orthants)"
        )
    signs, x, _, _, res = _qp._enumerate_patterns(
        m.covariance, m.mean_returns, lam, _qp_max_iter(n)
    )
    if res > cfg.kkt_tolerance:
        raise SolverError(
            f"exact enumeration failed to certify KKT: residual {res:.3e} > "
            f"{cfg.kkt_tolerance:.3e}"
        )
    return _finish(m, lam, signs, x, ORTHANT_EXACT)


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    if parts == 1:
        return [(total,)]
    out: list[tuple[int, ...]] = []
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            out.append((head,) + tail)
    return out


def grid_oracle(m: MarketMoment, lam: float, resolution: int) -> GroundState:
    """Brute force over a regular grid on the L1 sphere (N <= 4 only).

    Enumerates every nonnegative integer split of ``resolution`` across
    assets and every sign assignment, evaluating the objective directly
    with numpy. Accuracy is O(1/resolution); this exists purely to
    cross-check the QP-based solvers.
    """
    lam = _check_lambda(lam)
    n = m.asset_count
    if n > 4:
        raise ValueError(f"grid_oracle supports at most 4 assets, got {n}")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    mags = np.array(_compositions(resolution, n), dtype=np.float64) / resolution
    R = m.mean_returns
    C = m.covariance
    best: tuple[float, float, np.ndarray, np.ndarray] | None = None
    for mask_bits in product((1.0, -1.0), repeat=n):
        mask = np.array(mask_bits)
        w = mags * mask
        h = (1.0 - lam) * np.einsum("ki,ij,kj->k", w, C, w) - lam * (w @ R)
        ret = w @ R
        k = int(np.argmin(h))
        tied = np.flatnonzero(h <= h[k] + _TIE_TOL)
        k = int(tied[np.argmax(ret[tied])])
        # within one mask the earliest composition wins remaining ties
        tied2 = tied[ret[tied] >= ret[k] - _TIE_TOL]
        k = int(tied2[0])
        cand = (float(h[k]), float(ret[k]), mask, w[k])
        if best is None or _better(cand, best):
            best = cand
    assert best is not None
    p = Portfolio(best[3])
    return GroundState(p, hamiltonian(p, m, lam), lam, GRID_ORACLE, best[2])
