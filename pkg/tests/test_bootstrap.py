import numpy as np
import pytest

from pocause import (
    DegenerateError,
    EstimatorConfig,
    NoSupportError,
    PoCQuery,
    bootstrap,
    derived_rng,
    evaluate_query,
)


def _pns_pipeline(table):
    query = PoCQuery(kind="pns", thresholds=((3.0,),), treatments=((0.0,), (1.0,)),
                     covariates=(0.0,))
    return evaluate_query(table, query, EstimatorConfig(method="empirical")).value


def test_result_fields_are_coherent(small_table):
    result = bootstrap(small_table, _pns_pipeline, n_boot=60, seed=1)
    assert result.n_boot == 60
    assert result.n_failures >= 0
    assert result.ci_lower <= result.ci_upper
    assert result.boot_sd >= 0.0
    assert 0.0 <= result.point <= 1.0


def test_thread_count_does_not_change_numbers(small_table):
    serial = bootstrap(small_table, _pns_pipeline, n_boot=80, seed=9, threads=1)
    parallel = bootstrap(small_table, _pns_pipeline, n_boot=80, seed=9, threads=6)
    assert serial == parallel


def test_replicates_follow_pinned_streams(small_table):
    """Replicate b resamples with its own derived stream, so the whole run
    is reproducible from (seed, b) alone."""
    n = small_table.n_rows

    seen = []

    def spy(table):
        seen.append(table.columns["y"].copy())
        return 0.5

    bootstrap(small_table, spy, n_boot=3, seed=42)
    # seen[0] is the point estimate on the full table.
    for b in range(3):
        idx = derived_rng(42, b).integers(0, n, size=n)
        np.testing.assert_array_equal(seen[b + 1], small_table.columns["y"][idx])


def test_recoverable_failures_are_counted_not_fatal(small_table):
    calls = {"n": 0}

    def flaky(table):
        calls["n"] += 1
        if calls["n"] > 1 and calls["n"] % 2 == 0:
            raise NoSupportError("resample lost the stratum")
        return 0.25

    result = bootstrap(small_table, flaky, n_boot=10, seed=3)
    assert result.n_failures == 5
    assert result.n_boot == 10
    assert result.boot_mean == 0.25


def test_point_estimate_failure_propagates(small_table):
    def broken(table):
        raise NoSupportError("not even the full table works")

    with pytest.raises(NoSupportError):
        bootstrap(small_table, broken, n_boot=5, seed=0)


def test_all_replicates_failing_is_degenerate(small_table):
    calls = {"n": 0}

    def fail_after_point(table):
        calls["n"] += 1
        if calls["n"] > 1:
            raise NoSupportError("every resample breaks")
        return 0.5

    with pytest.raises(DegenerateError):
        bootstrap(small_table, fail_after_point, n_boot=4, seed=0)


def test_unexpected_errors_are_not_swallowed(small_table):
    calls = {"n": 0}

    def buggy(table):
        calls["n"] += 1
        if calls["n"] > 1:
            raise ZeroDivisionError("a genuine bug")
        return 0.5

    with pytest.raises(ZeroDivisionError):
        bootstrap(small_table, buggy, n_boot=4, seed=0)


def test_interval_covers_a_stable_statistic(small_table):
    result = bootstrap(small_table, lambda t: float(t.columns["y"].mean()),
                       n_boot=200, seed=5)
    assert result.ci_lower <= result.point <= result.ci_upper
    assert result.boot_sd > 0.0
