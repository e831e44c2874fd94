import math

import numpy as np
import pytest

from pocause import (
    EmpiricalCdf,
    LogisticCdf,
    NoSupportError,
    SeparationError,
    fit_logistic,
    lexicographic_default,
)

COEF_TOL = 1e-7


def test_logistic_recovers_exact_two_point_solution():
    """Binary feature, success rates 1/4 at 0 and 3/4 at 1.

    The likelihood is maximized exactly at intercept log(1/3) and slope
    log(9), so the solver has a closed-form answer to hit.
    """
    x = np.repeat([0.0, 1.0], 8).reshape(-1, 1)
    y = np.array([1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1], dtype=float)
    model = fit_logistic(x, y)
    assert model.converged
    assert abs(model.intercept - math.log(1 / 3)) < COEF_TOL
    assert abs(model.coefficients[0] - math.log(9.0)) < COEF_TOL


def test_logistic_fit_is_deterministic():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(400, 3))
    y = (rng.random(400) < 1 / (1 + np.exp(-x[:, 0]))).astype(float)
    a = fit_logistic(x, y)
    b = fit_logistic(x, y)
    np.testing.assert_array_equal(a.coefficients, b.coefficients)
    assert a.intercept == b.intercept
    assert a.n_iter == b.n_iter


def test_constant_labels_raise_separation():
    x = np.linspace(-1, 1, 30).reshape(-1, 1)
    with pytest.raises(SeparationError):
        fit_logistic(x, np.ones(30))
    with pytest.raises(SeparationError):
        fit_logistic(x, np.zeros(30))


def test_diverging_iterates_raise_separation():
    """Labels split perfectly across a gap far below the feature scale, so
    the unpenalized iterates blow up instead of settling."""
    x = np.concatenate([np.zeros(20), np.full(20, 1e-9)]).reshape(-1, 1)
    y = np.concatenate([np.zeros(20), np.ones(20)])
    with pytest.raises(SeparationError):
        fit_logistic(x, y)
    model = fit_logistic(x, y, ridge=0.1)
    assert model.converged
    assert np.isfinite(model.coefficients).all()


def test_ridge_shrinks_slopes_not_intercept():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(600, 2))
    y = (rng.random(600) < 1 / (1 + np.exp(-(0.5 + x[:, 0])))).astype(float)
    loose = fit_logistic(x, y, ridge=1e-9)
    tight = fit_logistic(x, y, ridge=50.0)
    assert np.linalg.norm(tight.coefficients) < np.linalg.norm(loose.coefficients)
    # The intercept is never penalized, so it still tracks the base rate.
    base = math.log(y.mean() / (1 - y.mean()))
    assert abs(tight.intercept - base) < 0.2


def test_empirical_rho_matches_hand_counts(small_table):
    est = EmpiricalCdf(small_table)
    pair = est.rho_pair((3.0,), (0.0,), (1.0,))
    # Cell outcomes are 1,2,3,4: strictly below 3 is 2 of 4, weakly 3 of 4.
    assert pair.strict == 0.5
    assert pair.weak == 0.75
    assert not pair.clipped


def test_empirical_off_support_stratum(small_table):
    est = EmpiricalCdf(small_table)
    with pytest.raises(NoSupportError) as excinfo:
        est.rho_pair((3.0,), (99.0,), (0.0,))
    assert "99.0" in str(excinfo.value)
    assert "np.float64" not in str(excinfo.value)


def test_logistic_constant_labels_bypass_the_solver(small_table):
    est = LogisticCdf(small_table)
    # Every outcome is weakly below 9, none strictly below 1.
    assert est.rho_pair((9.0,), (0.0,), (0.0,)).weak == 1.0
    assert est.rho_pair((1.0,), (1.0,), (1.0,)).strict == 0.0


def test_logistic_clips_strict_to_weak(small_table):
    est = LogisticCdf(small_table)
    for y in (2.0, 3.0, 4.0):
        for x in (0.0, 1.0):
            pair = est.rho_pair((y,), (x,), (0.0,))
            assert 0.0 <= pair.strict <= pair.weak <= 1.0


def test_logistic_separation_fallback_is_recorded():
    """A treatment column that perfectly splits the labels trips the exact
    solver; the estimator retries with a tiny ridge and says so."""
    from pocause import DataTable, TableSchema, Variable

    schema = TableSchema(
        (Variable("y", "outcome", position=0), Variable("x", "treatment"))
    )
    x = np.concatenate([np.zeros(20), np.full(20, 1e-9)])
    y = np.where(x > 0, 5.0, 0.0)
    table = DataTable(schema, {"y": y, "x": x})
    est = LogisticCdf(table)
    pair = est.rho_pair((2.0,), (0.0,), ())
    assert 0.0 < pair.strict <= pair.weak < 1.0
    notes = list(est.diagnostics)
    assert sum("ridge" in note for note in notes) == 2
    assert all("np.float64" not in note for note in notes)


def test_order_defaults_to_first_component_ascending(small_table):
    est = EmpiricalCdf(small_table)
    assert est.order == lexicographic_default(1)
