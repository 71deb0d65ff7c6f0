"""Dual cones: audits and absorption.

For reverse and cassaigne the natural extension is a bijection on a
product domain Lambda x Lambda*; for brun the domain is a disjoint
union of 18 products tied to the Markov structure.  The audits verify
the branch-by-branch bijections on exact rational samples and map the
extreme rays through the transposed matrices; random dual vectors are
absorbed into the domain after a few steps and never leave.
"""

from mcf import absorption_survey, bijectivity_audit, dual_membership, get_algorithm

for name in ["reverse", "cassaigne", "brun"]:
    spec = get_algorithm(name)
    report = bijectivity_audit(spec, n_samples=2000, seed=7)
    print(report.to_text())

print("Dual membership of reverse vectors (triangle-inequality cone):")
rev = get_algorithm("reverse")
for a in [(3, 3, 1), (1, 1, 5), (2, 2, 2)]:
    m = dual_membership(rev, a)
    print(f"  a={a}: inside={m.inside} piece={m.piece}")

print("\nAbsorption statistics, 200 random starts each:")
for name in ["reverse", "cassaigne", "brun"]:
    surv = absorption_survey(get_algorithm(name), n_starts=200,
                             absorb_within=1000, stay_steps=5000, seed=1)
    print(f"  {name:10s} absorbed {surv.absorbed_fraction:.0%} "
          f"(slowest {surv.max_time} steps), escapes {surv.escapes}")
