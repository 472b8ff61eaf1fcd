"""The three-parameter Mittag-Leffler function.

Its classical special cases reduce to exponentials and cosines. As the order
drops below 1, the decay changes from exponential to a heavy power-law tail.

    python3 demos/01_mittag_leffler.py
"""

import numpy as np

from fracdr.errors import AccuracyError
from fracdr.mlf import ml

z = np.linspace(-10, 10, 9)
print("special cases on z in [-10, 10]")
print(f"  E_(1,1)(z)     vs exp(z):         max rel err {np.max(np.abs(ml(1, 1, 1, z) / np.exp(z) - 1)):.1e}")
print(f"  E_(2,1)(-z^2)  vs cos(z):         max abs err {np.max(np.abs(ml(2, 1, 1, -z**2) - np.cos(z))):.1e}")
print(f"  E^2_(1,1)(z)   vs (1 + z) exp(z): max abs err "
      f"{np.max(np.abs(ml(1, 1, 2, z) - (1 + z) * np.exp(z)) / np.maximum(1, np.exp(z))):.1e}")

# relaxation y(t) = E_alpha(-t^alpha) solves D^alpha y = -y, y(0) = 1
t = np.array([0.5, 1.0, 2.0, 5.0, 10.0, 20.0])
print("\nrelaxation E_alpha(-t^alpha)")
print("   t     " + "  ".join(f"alpha={a:<4}" for a in (0.3, 0.6, 0.9, 1.0)))
for tv in t:
    row = [ml(a, 1, 1, -tv**a) for a in (0.3, 0.6, 0.9, 1.0)]
    print(f"{tv:5.1f}   " + "  ".join(f"{v:10.3e}" for v in row))

# outside the accuracy domain the function refuses instead of guessing
try:
    ml(1, 1, 1, -500.0)
except AccuracyError as exc:
    print(f"\nz = -500: {exc}")
