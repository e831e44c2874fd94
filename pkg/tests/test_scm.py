import json
import math

import numpy as np
import pytest

from pocause import (
    CfClause,
    ConfigError,
    CounterfactualEvent,
    NoSupportError,
    TabularMean,
    check_monotonicity,
    derived_rng,
    export_trajectories,
    flip_event,
    load_scm,
    monotonicity_probe,
    oracle_evidence,
    oracle_joint,
    packaged_spec_path,
    scm_from_dict,
    simulate,
)

ORACLE_SIGMAS = 4.0


def _spec(name):
    return load_scm(packaged_spec_path(name))


def test_simulate_is_seed_deterministic():
    spec = _spec("lexi2")
    a = simulate(spec, 500, seed=3)
    b = simulate(spec, 500, seed=3)
    for name in a.columns:
        np.testing.assert_array_equal(a.columns[name], b.columns[name])
    c = simulate(spec, 500, seed=4)
    assert any(
        not np.array_equal(a.columns[name], c.columns[name]) for name in a.columns
    )


def test_policy_never_sees_the_noise():
    """Treatment choice must be independent of the latent draw; the group
    means of each latent coordinate stay at the population value."""
    spec = _spec("lexi2")
    table, latent = simulate(spec, 60_000, seed=1, return_latent=True)
    x = table.treatments()[:, 0]
    for j in range(latent.shape[1]):
        for v in np.unique(x):
            group = latent[x == v, j]
            se = group.std() / math.sqrt(group.size)
            assert abs(group.mean()) < ORACLE_SIGMAS * se + 1e-3


def test_oracle_matches_normal_closed_form():
    spec = _spec("additive_scalar")
    event = flip_event([(0.8,)], [(0.0,), (1.5,)])
    result = oracle_joint(spec, event, n_mc=200_000, seed=5)
    from scipy.stats import norm

    truth = norm.cdf(0.8) - norm.cdf(0.8 - 1.5)
    assert abs(result.value - truth) < ORACLE_SIGMAS * result.std_error
    assert result.n_used == result.n_mc


def test_oracle_single_clause_reach_probability():
    spec = _spec("additive_scalar")
    event = CounterfactualEvent((CfClause(x=(1.5,), at_least=(0.8,)),))
    result = oracle_joint(spec, event, n_mc=200_000, seed=6)
    from scipy.stats import norm

    truth = 1.0 - norm.cdf(0.8 - 1.5)
    assert abs(result.value - truth) < ORACLE_SIGMAS * result.std_error


def test_pinned_evidence_oracle_is_exact():
    spec = _spec("additive_scalar")
    result = oracle_evidence(
        spec,
        thresholds=((0.8,),),
        treatments=((0.0,), (1.5,)),
        evidence_y=(0.5,),
        evidence_x=(1.0,),
    )
    # Seeing y = 0.5 under x = 1.0 pins u = -0.5, inside the flip window.
    assert result.exact
    assert result.std_error == 0.0
    assert result.value == 1.0


def test_pinned_evidence_outside_noise_support():
    obj = json.load(open(packaged_spec_path("additive_scalar"), encoding="utf-8"))
    obj["noise"] = {"kind": "uniform_box", "lo": [-1.0], "hi": [1.0]}
    spec = scm_from_dict(obj)
    # Seeing y = 9 under x = 1 would need u = 8, outside the box.
    with pytest.raises(NoSupportError):
        oracle_evidence(
            spec,
            thresholds=((0.8,),),
            treatments=((0.0,), (1.5,)),
            evidence_y=(9.0,),
            evidence_x=(1.0,),
        )


def test_gaussian_noise_pinned_evidence_never_lacks_support():
    spec = _spec("nonmono")
    result = oracle_evidence(
        spec,
        thresholds=((0.5,),),
        treatments=((0.0,), (1.0,)),
        evidence_y=(9.0,),
        evidence_x=(0.0,),
    )
    # An extreme observation is merely improbable, and u = 9 sits far
    # outside every flip window.
    assert result.exact
    assert result.value == 0.0


def test_rejection_evidence_oracle_recovers_hand_value():
    spec = _spec("tabular")
    result = oracle_evidence(
        spec,
        thresholds=((2.0,),),
        treatments=((1.0,), (2.0,)),
        evidence_y=(1.0,),
        evidence_x=(1.0,),
        c=(0.0,),
        n_mc=150_000,
        seed=8,
    )
    # Atom (0, 0.5], flip interval [0.2, 0.5): overlap ratio 0.6 by hand.
    assert not result.exact
    assert 0 < result.n_used < result.n_mc
    assert abs(result.value - 0.6) < ORACLE_SIGMAS * result.std_error


def test_rejection_oracle_rejects_impossible_atom():
    spec = _spec("tabular")
    with pytest.raises(NoSupportError):
        oracle_evidence(
            spec,
            thresholds=((2.0,),),
            treatments=((1.0,), (2.0,)),
            evidence_y=(7.0,),
            evidence_x=(1.0,),
            c=(0.0,),
            n_mc=5_000,
            seed=8,
        )


@pytest.mark.parametrize("name", ["additive_scalar", "lexi2", "nonmono", "tabular"])
def test_spec_json_round_trip(name):
    spec = _spec(name)
    clone = scm_from_dict(json.loads(json.dumps(spec.as_dict())))
    assert clone.as_dict() == spec.as_dict()


def test_spec_rejects_unknown_fields():
    obj = json.load(open(packaged_spec_path("additive_scalar"), encoding="utf-8"))
    obj["bonus"] = True
    with pytest.raises(ConfigError, match="bonus"):
        scm_from_dict(obj)


def test_monotone_model_reports_zero_violation():
    spec = _spec("additive_scalar")
    thresholds, pairs = monotonicity_probe(spec, n_thresholds=12, n_pilot=800, seed=2)
    report = check_monotonicity(spec, thresholds, pairs=pairs, n_mc=4_000, seed=2)
    assert report.max_violation == 0.0
    assert report.std_error == 0.0


def test_flipped_model_reports_large_violation():
    spec = _spec("nonmono")
    thresholds, pairs = monotonicity_probe(spec, n_thresholds=12, n_pilot=800, seed=2)
    report = check_monotonicity(spec, thresholds, pairs=pairs, n_mc=20_000, seed=2)
    assert report.max_violation >= 0.05
    assert report.at_pair is not None


def test_trajectories_monotone_never_cross():
    spec = _spec("additive_scalar")
    grid = [(0.0,), (0.5,), (1.0,), (1.5,)]
    traj = export_trajectories(spec, grid, n_u=20, seed=4)
    assert traj.outcomes.shape == (20, 4, 1)
    assert traj.crossing_count == 0


def test_trajectories_flipped_all_pairs_cross():
    spec = _spec("nonmono")
    traj = export_trajectories(spec, [(0.0,), (1.0,)], n_u=20, seed=4)
    # Every latent pair swaps rank across the flip, one crossing per pair.
    assert traj.crossing_count == math.comb(20, 2)


def test_derived_streams_are_independent_and_stable():
    a1 = derived_rng(11, 0).random(6)
    a2 = derived_rng(11, 0).random(6)
    b = derived_rng(11, 1).random(6)
    np.testing.assert_array_equal(a1, a2)
    assert not np.array_equal(a1, b)


def test_tabular_mean_validation():
    with pytest.raises(ConfigError):
        TabularMean(
            x_levels=((1.0,),),
            c_levels=((0.0,),),
            cuts=(((0.8, 0.5),),),
            levels=((1.0,), (2.0,), (3.0,)),
        )
    obj = json.load(open(packaged_spec_path("tabular"), encoding="utf-8"))
    obj["mean"]["levels"] = [[1.0], [1.0], [3.0]]
    with pytest.raises(ConfigError, match="ascend"):
        scm_from_dict(obj)


def test_flip_event_arity_error():
    with pytest.raises(ConfigError):
        flip_event([(0.3,), (0.9,)], [(0.0,), (1.0,)])


def test_tabular_state_probs_sum_to_one():
    spec = _spec("tabular")
    mean = spec.mean
    for x in mean.x_levels:
        for c in mean.c_levels:
            probs = mean.state_probs(x, c)
            assert probs.shape == (3,)
            assert abs(probs.sum() - 1.0) < 1e-12
