"""Plugging closed-form fields back into the PDE system.

The residual D^alpha u_k - R_k(u) is evaluated on a 33 x 257 grid over
x in [0, 1] and t in [0.1, 2]. Time derivatives are taken numerically from the
field itself, so the check does not rely on the reduction. Riemann-Liouville
fields are singular at t = 0, which is why the window starts at t = 0.1.

    python3 demos/04_pde_residual.py
"""

from fractions import Fraction

from fracdr.closedform import Example1Params, Example3Params, solve_example1, solve_example3
from fracdr.data import HistorySpec, InitialData
from fracdr.oracle import pde_residual

beta = {"11": 1.0, "12": 0.5, "21": 0.8, "22": 0.6}
kappa = {"11": 0.3, "12": 0.2, "21": 0.1, "22": 0.4}
data, hist = InitialData(beta, kappa), HistorySpec(beta)

F = Fraction
ex1 = Example1Params(mu20=1, gamma10=F(3, 10), gamma11=-1, gh11=F(1, 2), gamma12=F(2, 5), a12=F(1, 2), a10=1,
                     a22=F(3, 5), b21=F(-3, 5), a20=F(3, 10), b20=1, gamma22=F(6, 5), gh22=F(2, 5))
ex3 = Example3Params(gamma10=F(3, 10), gamma11=F(-1, 2), gamma12=F(3, 5), gh11=F(2, 5), gh12=F(2, 5),
                     gamma20=F(1, 5), gamma22=F(-3, 10), gh22=F(2, 5), a12=1, a10=F(1, 2), b10=F(3, 10),
                     a22=F(7, 10), a20=F(1, 5), b20=1)

runs = [
    ("Example 1, Caputo, alpha 0.8", solve_example1(ex1, "caputo", (0.8, 0.8), data, hist)),
    ("Example 1, RL, alpha 1.5", solve_example1(ex1, "rl", (1.5, 1.5), data)),
    ("Example 3, Caputo, alpha 1.4", solve_example3(ex3, "caputo", 1.4, data, hist)),
    ("Example 3, RL, alpha 0.8", solve_example3(ex3, "rl", 0.8, data)),
]
for name, f in runs:
    rep = pde_residual(f, f.op, (0.1, 2.0), (0.0, 1.0), nt=257, nx=33)
    print(f"{name:30} {rep.summary()}")
