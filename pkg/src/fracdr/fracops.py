"""Fractional integrals and derivatives of uniformly sampled trajectories.

All operators share one construction: the Riemann-Liouville integral of
order ``mu`` is evaluated by product-trapezoidal quadrature (the kernel
``(t - v)**(mu - 1) / Gamma(mu)`` integrated exactly against the piecewise
linear interpolant), and derivatives combine it with finite differences.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from fracdr.errors import DomainError

__all__ = [
    "FracKind",
    "FracOrder",
    "SampledTrajectory",
    "rl_integral",
    "caputo_derivative",
    "rl_derivative",
    "fractional_derivative",
    "second_difference",
]


class FracKind(enum.Enum):
    CAPUTO = "caputo"
    RL = "rl"

    @classmethod
    def parse(cls, value) -> "FracKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        aliases = {"caputo": cls.CAPUTO, "c": cls.CAPUTO, "rl": cls.RL,
                   "riemannliouville": cls.RL}
        if key not in aliases:
            raise DomainError(f"unknown derivative kind {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class FracOrder:
    """Order ``alpha`` in (0, 2] of a Caputo or Riemann-Liouville derivative."""

    alpha: float
    kind: FracKind = FracKind.CAPUTO

    def __post_init__(self) -> None:
        if not (0 < self.alpha <= 2):
            raise DomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        object.__setattr__(self, "kind", FracKind.parse(self.kind))

    @property
    def n(self) -> int:
        return 1 if self.alpha <= 1 else 2


@dataclass(frozen=True)
class SampledTrajectory:
    """Samples ``values[j] = f(t0 + j h)``."""

    t0: float
    h: float
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 3:
            raise DomainError("a trajectory needs at least 3 samples")
        if not (self.h > 0):
            raise DomainError("step must be positive")
        if self.t0 < 0:
            raise DomainError("t0 must be non-negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, f, t_end: float, n: int, t0: float = 0.0) -> "SampledTrajectory":
        """Sample ``f`` at ``n + 1`` equispaced points on ``[t0, t_end]``."""
        t = np.linspace(t0, t_end, n + 1)
        h = (t_end - t0) / n
        with np.errstate(divide="ignore", invalid="ignore"):
            return cls(t0, h, np.asarray(f(t), dtype=float))

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.values.size)

    def __len__(self) -> int:
        return self.values.size

    def at(self, t: float) -> float:
        """Value at a grid time (nearest sample; raises if off-grid)."""
        j = (t - self.t0) / self.h
        jr = int(round(j))
        if abs(j - jr) > 1e-8 or not 0 <= jr < self.values.size:
            raise DomainError(f"t = {t} is not a grid point")
        return float(self.values[jr])

    def with_values(self, values) -> "SampledTrajectory":
        return SampledTrajectory(self.t0, self.h, values)


def _check_origin(f: SampledTrajectory) -> None:
    if f.t0 != 0:
        raise DomainError("fractional operators need samples starting at t = 0")


def _trapezoid_weights(mu: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Convolution weights ``w_k`` and start weights ``a_{0,k}`` for k = 0..n."""
    k = np.arange(n + 1, dtype=float)
    p = mu + 1.0
    w = np.empty(n + 1)
    w[0] = 1.0
    if n >= 1:
        w[1:] = (k[1:] + 1) ** p - 2 * k[1:] ** p + (k[1:] - 1) ** p
    a0 = np.zeros(n + 1)
    a0[1:] = (k[1:] - 1) ** p - (k[1:] - p) * k[1:] ** mu
    return w, a0


def rl_integral(f: SampledTrajectory, mu: float, singular_exponent: float | None = None) -> SampledTrajectory:
    """Riemann-Liouville integral ``I^mu f`` on the sampling grid.

    With ``singular_exponent = s`` the samples are split as ``c t**s + g``,
    ``c`` fitted to the samples at ``h`` and ``2h``; the power is integrated
    exactly and ``g`` by quadrature. The (possibly infinite) sample at
    ``t = 0`` is then ignored.
    """
    if not (0 < mu < 2):
        raise DomainError(f"integral order must lie in (0, 2), got {mu}")
    _check_origin(f)
    vals = np.array(f.values, dtype=float)
    n = vals.size - 1
    h = f.h
    scale = h**mu / gamma(mu + 2)
    w, a0 = _trapezoid_weights(mu, n)
    if singular_exponent is None:
        out = np.zeros(n + 1)
        out[1:] = scale * (a0[1:] * vals[0] + np.convolve(w, vals[1:])[:n])
        return f.with_values(out)

    s = float(singular_exponent)
    if not (-1 < s <= 1):
        raise DomainError("singular exponent must lie in (-1, 1]")
    t = h * np.arange(n + 1)
    if s == 0:
        vals[0] = vals[1]
        return rl_integral(f.with_values(vals), mu)
    # f ~ c t**s + g with g regular: integrate c t**s exactly, g by trapezoid
    f1, f2 = vals[1], vals[2]
    c = (f2 - f1) / (h**s * (2.0**s - 1.0))
    d = f1 - c * h**s
    g = np.empty(n + 1)
    g[0] = d
    g[1:] = vals[1:] - c * t[1:] ** s
    out = np.array(rl_integral(f.with_values(g), mu).values)
    coef = c * gamma(s + 1) / gamma(s + mu + 1)
    with np.errstate(divide="ignore"):
        out += coef * t ** (s + mu)
    return f.with_values(out)


def second_difference(vals: np.ndarray, h: float) -> np.ndarray:
    """Second derivative: central inside, second-order one-sided at both ends."""
    if vals.size < 4:
        raise DomainError("need at least 4 samples for a second difference")
    out = np.empty_like(vals)
    out[1:-1] = (vals[2:] - 2 * vals[1:-1] + vals[:-2]) / h**2
    out[0] = (2 * vals[0] - 5 * vals[1] + 4 * vals[2] - vals[3]) / h**2
    out[-1] = (2 * vals[-1] - 5 * vals[-2] + 4 * vals[-3] - vals[-4]) / h**2
    return out


def _first_difference(vals: np.ndarray, h: float) -> np.ndarray:
    return np.gradient(vals, h, edge_order=2)


def caputo_derivative(f: SampledTrajectory, order: FracOrder) -> SampledTrajectory:
    """Caputo derivative ``I^{n - alpha} f^(n)``.

    For ``alpha < 1`` this is the L1 scheme (exact for piecewise linear
    ``f``, error O(h^(2 - alpha))); for ``1 < alpha < 2`` the second
    difference is integrated by :func:`rl_integral`; integer orders are plain
    differences.
    """
    _check_origin(f)
    alpha = order.alpha
    vals = np.asarray(f.values, dtype=float)
    if vals.size < order.n + 2:
        raise DomainError("not enough samples for this order")
    h = f.h
    if alpha == 1:
        return f.with_values(_first_difference(vals, h))
    if alpha == 2:
        return f.with_values(second_difference(vals, h))
    if alpha < 1:
        n = vals.size - 1
        k = np.arange(n, dtype=float)
        b = (k + 1) ** (1 - alpha) - k ** (1 - alpha)
        out = np.zeros(n + 1)
        out[1:] = np.convolve(b, np.diff(vals))[:n] * h ** (-alpha) / gamma(2 - alpha)
        # value at t = 0 is the limit of the first cell
        out[0] = 0.0
        return f.with_values(out)
    d2 = f.with_values(second_difference(vals, h))
    return rl_integral(d2, 2 - alpha)


def rl_derivative(f: SampledTrajectory, order: FracOrder,
                  singular_exponent: float | None = None) -> SampledTrajectory:
    """Riemann-Liouville derivative ``d^n/dt^n I^{n - alpha} f``."""
    _check_origin(f)
    alpha = order.alpha
    h = f.h
    vals = np.asarray(f.values, dtype=float)
    if vals.size < order.n + 3:
        raise DomainError("not enough samples for this order")
    if alpha == 1:
        return f.with_values(_first_difference(vals, h))
    if alpha == 2:
        return f.with_values(second_difference(vals, h))
    integ = rl_integral(f, order.n - alpha, singular_exponent)
    iv = integ.values
    if order.n == 1:
        if singular_exponent is not None:
            # the integral may be unbounded at 0; keep the stencils off that sample
            out = np.empty_like(iv)
            out[1:] = _first_difference(iv[1:], h)
            out[0] = np.nan
            return f.with_values(out)
        return f.with_values(_first_difference(iv, h))
    if singular_exponent is not None:
        out = np.empty_like(iv)
        out[1:] = second_difference(iv[1:], h)
        out[0] = np.nan
        return f.with_values(out)
    return f.with_values(second_difference(iv, h))


def fractional_derivative(f: SampledTrajectory, order: FracOrder,
                          singular_exponent: float | None = None) -> SampledTrajectory:
    """Dispatch on ``order.kind``."""
    if order.kind is FracKind.CAPUTO:
        return caputo_derivative(f, order)
    return rl_derivative(f, order, singular_exponent)
