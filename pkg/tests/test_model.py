"""Budget validation, objective terms, and magnetization."""

import numpy as np
import pytest

from spinfolio.ingest import MarketMoment
from spinfolio.model import (
    Portfolio,
    hamiltonian,
    magnetization,
    portfolio_return,
    portfolio_variance,
    validate_budget,
)


def moment2():
    return MarketMoment(
        2, np.array([0.03, -0.01]), np.array([[0.04, 0.01], [0.01, 0.09]])
    )


def test_portfolio_accepts_unit_l1_with_shorts():
    p = Portfolio(np.array([0.25, -0.75]))
    assert len(p) == 2
    assert not p.weights.flags.writeable


def test_portfolio_rejects_budget_violation():
    with pytest.raises(ValueError, match="budget violation"):
        Portfolio(np.array([0.6, 0.6]))
    with pytest.raises(ValueError, match="budget violation"):
        Portfolio(np.array([0.5, -0.4]))


def test_portfolio_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError, match="non-empty vector"):
        Portfolio(np.ones((2, 2)) / 4.0)
    with pytest.raises(ValueError, match="non-empty vector"):
        Portfolio(np.array([]))
    with pytest.raises(ValueError, match="finite"):
        Portfolio(np.array([np.nan, 1.0]))


def test_validate_budget_tolerance_edge():
    validate_budget([0.5, 0.5 + 9e-11])
    with pytest.raises(ValueError, match="budget violation"):
        validate_budget([0.5, 0.5 + 2e-10])


def test_portfolio_return_and_variance_values():
    m = moment2()
    p = Portfolio(np.array([0.5, -0.5]))
    assert portfolio_return(p, m) == pytest.approx(0.02, abs=1e-15)
    expected_var = 0.25 * 0.04 - 2 * 0.25 * 0.01 + 0.25 * 0.09
    assert portfolio_variance(p, m) == pytest.approx(expected_var, abs=1e-15)


def test_variance_is_never_negative():
    v = np.array([1.0, 2.0, 3.0])
    cov = np.outer(v, v)
    m = MarketMoment(3, np.zeros(3), cov)
    w = np.array([0.5, -0.25, 0.0])  # orthogonal-ish to v up to round-off
    w = w / np.sum(np.abs(w))
    assert portfolio_variance(Portfolio(w), m) >= 0.0


def test_dimension_mismatch_raises():
    m = moment2()
    p = Portfolio(np.array([0.5, 0.25, 0.25]))
    with pytest.raises(ValueError, match="dimension mismatch"):
        portfolio_return(p, m)
    with pytest.raises(ValueError, match="dimension mismatch"):
        portfolio_variance(p, m)


def test_hamiltonian_combines_terms():
    m = moment2()
    p = Portfolio(np.array([0.5, -0.5]))
    for lam in (0.0, 0.3, 1.0):
        expected = -lam * portfolio_return(p, m) + (1.0 - lam) * portfolio_variance(
            p, m
        )
        assert hamiltonian(p, m, lam) == pytest.approx(expected, abs=1e-16)


def test_hamiltonian_rejects_bad_lambda():
    m = moment2()
    p = Portfolio(np.array([1.0, 0.0]))
    for lam in (-0.1, 1.1, np.nan):
        with pytest.raises(ValueError, match="lambda"):
            hamiltonian(p, m, lam)


def test_magnetization_sum_and_clamp():
    assert magnetization(Portfolio(np.array([0.25, -0.75]))) == -0.5
    assert magnetization(Portfolio(np.array([0.5, 0.5]))) == 1.0
    assert magnetization(Portfolio(np.array([-0.5, -0.5]))) == -1.0
    many = np.full(7, 1.0 / 7.0)
    assert -1.0 <= magnetization(Portfolio(many)) <= 1.0
