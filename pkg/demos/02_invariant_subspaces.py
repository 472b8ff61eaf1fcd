"""Invariance checks and reduction to delay equations.

Example 1 couples a polynomial component on span{1, x} with a trigonometric
one on span{sin x, cos x}. The checker confirms the operator maps the space
into itself and returns the reduced delay system. A single extra quadratic
reaction term breaks invariance, and the checker reports the term that escapes.
Finally the catalog shows how a misprinted coefficient family is detected and
repaired.

    python3 demos/02_invariant_subspaces.py
"""

import random
from pathlib import Path

from fracdr.catalog import derive_correction, get_case, sample_params
from fracdr.subspace import check_invariance, load_spec

specs = Path(__file__).resolve().parent / "specs"

op, space = load_spec((specs / "example1.json").read_text())
rep = check_invariance(op, space)
print(rep.summary())
print(rep.reduced.pretty())

op, space = load_spec((specs / "example1_perturbed.json").read_text())
print("\nwith gamma_13 u1^2 added to R_1:")
print(check_invariance(op, space).summary())

case = get_case("2.2")
print(f"\ncatalog case {case.case_id} ({case.family}), space {case.space_text}")
p = sample_params(case, random.Random(7))
printed = check_invariance(*case.printed(p))
print("sampled coefficients: " + ", ".join(f"{k}={v}" for k, v in p.items()))
print(f"printed family invariant: {printed.invariant}")
op_in, space_in = case.machine_input(p)
corr = derive_correction(op_in, space_in)
for (k, slot), (old, new) in sorted(corr.changes.items()):
    print(f"  machine correction: {slot} in R_{k}: {old} -> {new}")
print(f"corrected family invariant: {check_invariance(*case.corrected(p)).invariant}")
