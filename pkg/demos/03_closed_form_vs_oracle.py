"""Closed-form solutions checked against direct numerical integration.

The closed forms are sums of delayed Mittag-Leffler kernels. Here they are set
against an Adams-Bashforth-Moulton integration of the same reduced delay
system, with steps of tau / 512. The deviation is max |closed - numeric| over
(1e-8 + 1e-3 |numeric|), so values below 1 mean agreement within 0.1 %.

    python3 demos/03_closed_form_vs_oracle.py
"""

from fractions import Fraction

import numpy as np

from fracdr.closedform import Example1Params, Example3Params, solve_example1, solve_example3
from fracdr.data import HistorySpec, InitialData
from fracdr.oracle import FddeProblem, compare, solve_fdde

beta = {"11": 1.0, "12": 0.5, "21": 0.8, "22": 0.6}
kappa = {"11": 0.3, "12": 0.2, "21": 0.1, "22": 0.4}
data, hist = InitialData(beta, kappa), HistorySpec(beta)

# exact coefficients keep the printed reduced system free of round-off
F = Fraction
ex1 = Example1Params(mu20=1, gamma10=F(3, 10), gamma11=-1, gh11=F(1, 2), gamma12=F(2, 5), a12=F(1, 2), a10=1,
                     a22=F(3, 5), b21=F(-3, 5), a20=F(3, 10), b20=1, gamma22=F(6, 5), gh22=F(2, 5))
ex3 = Example3Params(gamma10=F(3, 10), gamma11=F(-1, 2), gamma12=F(3, 5), gh11=F(2, 5), gh12=F(2, 5),
                     gamma20=F(1, 5), gamma22=F(-3, 10), gh22=F(2, 5), a12=1, a10=F(1, 2), b10=F(3, 10),
                     a22=F(7, 10), a20=F(1, 5), b20=1)


def deviation(f):
    num = solve_fdde(FddeProblem(f.reduced, f.orders, f.data, f.history, T=3.0, h=1 / 512))
    t = next(iter(num.values())).times
    return compare(f.trajectories(t), {k: v.values for k, v in num.items()}), f.trajectories([3.0])


print("Example 1, reduced system")
print(solve_example1(ex1, "caputo", (0.5, 0.5), data, hist).reduced.pretty())
print("\n example  orders        deviation  delta_11(3)  delta_21(3)")
for alphas in ((0.5, 0.5), (0.9, 0.7), (1.0, 1.0), (1.5, 1.2)):
    dev, end = deviation(solve_example1(ex1, "caputo", alphas, data, hist))
    print(f"   1      {str(alphas):12}  {max(dev.values()):9.1e}  {end[(1, 1)][0]:11.5f}  {end[(2, 1)][0]:11.5f}")
for alpha in (0.6, 1.0, 1.4):
    dev, end = deviation(solve_example3(ex3, "caputo", alpha, data, hist))
    print(f"   3      {alpha:<12}  {max(dev.values()):9.1e}  {end[(1, 1)][0]:11.5f}  {end[(2, 1)][0]:11.5f}")

# the literal coupled-system listing does not solve its own reduced equations
t = np.linspace(0, 3, 7)
good = solve_example3(ex3, "caputo", 0.8, data, hist).delta("11", t)
lit = solve_example3(ex3, "caputo", 0.8, data, hist, verbatim=True).delta("11", t)
print("\nExample 3 delta_11, solving kernels vs literal listing")
for tv, a, b in zip(t, good, lit):
    print(f"  t = {tv:3.1f}: {a:9.5f}  {b:9.5f}")
