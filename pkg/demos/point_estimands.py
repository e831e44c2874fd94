"""A tour of the point formulas, no data required.

Everything downstream reduces to a handful of arithmetic identities on
conditional CDF values. This script works through them with numbers you
can check on paper.
"""

import numpy as np

from pocause import (
    binary_poc,
    pn_point,
    pns_evidence_point,
    pns_multi_point,
    pns_point,
    ps_point,
)

print("Binary special case")
print("-------------------")
print("Success probability 0.8 when treated, 0.3 when not.")
pns, pn, ps = binary_poc(0.8, 0.3)
print(f"  pns = {pns:.4f}   (0.8 - 0.3: the mass the treatment actually moves)")
print(f"  pn  = {pn:.4f}   (among treated successes, how many needed it)")
print(f"  ps  = {ps:.4f}   (among untreated failures, how many it would fix)")

print()
print("The same numbers through the threshold route")
print("--------------------------------------------")
# rho is the probability of landing strictly below the threshold, so a
# success probability p corresponds to rho = 1 - p.
rho0, rho1 = 1.0 - 0.3, 1.0 - 0.8
print(f"  rho0 = {rho0}, rho1 = {rho1}")
print(f"  pns_point -> {pns_point(rho0, rho1):.4f}")
print(f"  pn_point  -> {pn_point(rho0, rho1):.4f}")
print(f"  ps_point  -> {ps_point(rho0, rho1):.4f}")

print()
print("Clamping")
print("--------")
print("A harmful treatment shift (rho0 < rho1) cannot have negative benefit:")
print(f"  pns_point(0.2, 0.7) = {pns_point(0.2, 0.7)}")

print()
print("Necessity and sufficiency bracket joint necessity-and-sufficiency:")
for r0, r1 in [(0.9, 0.4), (0.6, 0.1), (0.5, 0.45)]:
    v = pns_point(r0, r1)
    print(f"  rho0={r0}, rho1={r1}: pns={v:.3f} <= pn={pn_point(r0, r1):.3f}, "
          f"ps={ps_point(r0, r1):.3f}")

print()
print("Conditioning on observed evidence")
print("---------------------------------")
print("Observed outcome sits on an atom covering latent mass (0.2, 0.5]:")
value, case = pns_evidence_point(0.5, 0.2, 0.2, 0.5)
print(f"  flip interval [0.2, 0.5) covers it entirely -> {value} ({case})")
value, case = pns_evidence_point(0.5, 0.2, 0.0, 0.5)
print(f"  atom (0.0, 0.5], flip interval [0.2, 0.5): overlap 0.3 of 0.5 "
      f"-> {value} ({case})")
print("Zero-mass observation pins the latent exactly (continuous case):")
value, case = pns_evidence_point(0.7, 0.2, 0.4, 0.4)
print(f"  pinned at 0.4 inside [0.2, 0.7) -> {value} ({case})")
value, case = pns_evidence_point(0.7, 0.2, 0.9, 0.9)
print(f"  pinned at 0.9 outside          -> {value} ({case})")

print()
print("Chains")
print("------")
print("Each step confines the latent to an interval; the chain needs the")
print("intersection. With steps [0.4, 0.6) and [0.45, 0.65):")
print(f"  pns_multi_point -> {pns_multi_point([0.6, 0.65], [0.4, 0.45]):.4f}")
print("A single-step chain is exactly the plain estimand:")
rng = np.random.default_rng(1)
for _ in range(3):
    r0, r1 = sorted(rng.random(2))[::-1]
    assert pns_multi_point([r0], [r1]) == pns_point(r0, r1)
print("  checked on random inputs")
