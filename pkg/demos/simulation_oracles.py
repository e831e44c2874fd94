"""Estimate from simulated data, then cross-check against the simulator itself.

The point of a structural model in this package is that it supports two
independent routes to the same number:

  route 1: simulate observational data, estimate conditional CDFs, apply
           the point formulas;
  route 2: ask the model directly, by drawing latent noise and evaluating
           both potential outcomes per draw.

When the model is monotone in its noise the two routes must agree up to
sampling error. This script runs both on the bundled additive model.
"""

import argparse

from pocause import (
    CfClause,
    CounterfactualEvent,
    EstimatorConfig,
    PoCQuery,
    evaluate_query,
    flip_event,
    load_scm,
    oracle_joint,
    packaged_spec_path,
    simulate,
)

parser = argparse.ArgumentParser()
parser.add_argument("--n", type=int, default=40_000)
parser.add_argument("--n-mc", type=int, default=100_000)
parser.add_argument("--seed", type=int, default=7)
args = parser.parse_args()

spec = load_scm(packaged_spec_path("additive_scalar"))
table = simulate(spec, args.n, seed=args.seed)
print(f"simulated {table.n_rows} rows from the additive scalar model")

threshold, x0, x1 = (0.8,), (0.0,), (1.5,)
query = PoCQuery(kind="pns", thresholds=(threshold,), treatments=(x0, x1))

for method in ("empirical", "logistic"):
    est = evaluate_query(table, query, EstimatorConfig(method=method))
    print(f"  {method:9s} estimate: {est.value:.4f}")

oracle = oracle_joint(spec, flip_event([threshold], [x0, x1]),
                      n_mc=args.n_mc, seed=args.seed)
print(f"  oracle            : {oracle.value:.4f} "
      f"(mc std error {oracle.std_error:.4f})")

# For this model the truth is available in closed form as a difference of
# normal CDFs, which makes a nice third opinion.
from scipy.stats import norm  # noqa: E402

truth = norm.cdf(0.8) - norm.cdf(0.8 - 1.5)
print(f"  closed form       : {truth:.4f}")

print()
print("Necessity and sufficiency separately, against event-specific oracles:")
pn = evaluate_query(table, PoCQuery(kind="pn", thresholds=(threshold,),
                                    treatments=(x0, x1)),
                    EstimatorConfig(method="empirical"))
ps = evaluate_query(table, PoCQuery(kind="ps", thresholds=(threshold,),
                                    treatments=(x0, x1)),
                    EstimatorConfig(method="empirical"))
flip = oracle_joint(spec, flip_event([threshold], [x0, x1]),
                    n_mc=args.n_mc, seed=args.seed)
reach = oracle_joint(
    spec,
    CounterfactualEvent((CfClause(x=x1, at_least=threshold),)),
    n_mc=args.n_mc, seed=args.seed)
short = oracle_joint(
    spec,
    CounterfactualEvent((CfClause(x=x0, below=threshold),)),
    n_mc=args.n_mc, seed=args.seed)
print(f"  pn: estimated {pn.value:.4f}, oracle ratio {flip.value / reach.value:.4f}")
print(f"  ps: estimated {ps.value:.4f}, oracle ratio {flip.value / short.value:.4f}")
