"""Independent numerical checks: delay ODE integrators and a PDE residual.

* :func:`solve_fdde` integrates a reduced Caputo system with the fractional
  Adams-Bashforth-Moulton predictor-corrector (full memory, delay-aligned grid).
* :func:`solve_classical` integrates integer orders 1 and 2 with RK4 and the
  method of steps (cubic Hermite values at delayed stage times).
* :func:`pde_residual` plugs a solution field into the operator directly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma

from fracdr.data import HistorySpec, InitialData, parse_key
from fracdr.errors import DomainError
from fracdr.fracops import FracKind, FracOrder, SampledTrajectory, caputo_derivative, rl_derivative
from fracdr.subspace import DROperatorSpec, ReducedSystem

__all__ = [
    "FddeProblem",
    "solve_fdde",
    "solve_classical",
    "compare",
    "ResidualReport",
    "pde_residual",
    "apply_operator",
]

Trajectories = dict


def _steps(length: float, h: float, what: str) -> int:
    q = length / h
    n = int(round(q))
    if n < 1 or abs(q - n) > 1e-9 * max(1.0, q):
        raise DomainError(f"step {h} does not divide {what} = {length}")
    return n


@dataclass(frozen=True)
class FddeProblem:
    """A reduced delay system with orders, data and a delay-aligned grid."""

    system: ReducedSystem
    orders: tuple
    data: InitialData
    history: HistorySpec = field(default_factory=HistorySpec)
    T: float = 1.0
    h: float = 1.0 / 512

    def __post_init__(self) -> None:
        orders = tuple(o if isinstance(o, FracOrder) else FracOrder(float(o)) for o in self.orders)
        if len(orders) != 2:
            raise DomainError("one order per component is required")
        object.__setattr__(self, "orders", orders)
        if not (self.h > 0 and self.T > 0):
            raise DomainError("T and h must be positive")
        _steps(self.T, self.h, "T")
        for key in self.system.keys():
            for d in self.system.delays[key]:
                _steps(float(d.tau), self.h, "tau")

    @property
    def nsteps(self) -> int:
        return _steps(self.T, self.h, "T")

    def order_of(self, key) -> FracOrder:
        return self.orders[parse_key(key)[0] - 1]


class _Rhs:
    """Vectorised right-hand side with delay lookups on the step grid."""

    def __init__(self, p: FddeProblem):
        sysm = p.system
        self.keys = sysm.keys()
        self.index = {key: j for j, key in enumerate(self.keys)}
        self.c, self.lin, self.quad, _ = sysm.compiled()
        self.terms = []
        for row, key in enumerate(self.keys):
            for d in sysm.delays[key]:
                col = self.index[(d.component, d.index)]
                lag = _steps(float(d.tau), p.h, "tau")
                self.terms.append((row, col, float(d.coef), lag, float(d.tau)))
        self.history = p.history
        self.h = p.h
        self.has_quad = bool(np.any(self.quad))

    def free(self, y: np.ndarray) -> np.ndarray:
        out = self.c + self.lin @ y
        if self.has_quad:
            out = out + np.einsum("rij,i,j->r", self.quad, y, y)
        return out

    def delayed(self, grid: np.ndarray, j: float, row_out: np.ndarray, hermite=None) -> None:
        """Add delay terms at (possibly half-integer) step index ``j``."""
        for row, col, coef, lag, tau in self.terms:
            s = j - lag
            if s <= 0:
                val = float(self.history.value(self.keys[col], s * self.h)) if s < 0 else grid[0, col]
            elif s == int(s):
                val = grid[int(s), col]
            else:
                val = hermite(int(math.floor(s)), col)
            row_out[row] += coef * val


def solve_fdde(p: FddeProblem) -> Trajectories:
    """Fractional Adams-Bashforth-Moulton integration of a Caputo system."""
    if any(o.kind is not FracKind.CAPUTO for o in p.orders):
        raise DomainError("forward integration supports Caputo derivatives only")
    rhs = _Rhs(p)
    keys = rhs.keys
    n = len(keys)
    N = p.nsteps
    h = p.h
    alphas = np.array([p.order_of(key).alpha for key in keys])
    beta = np.array([p.data.b(key) for key in keys])
    kappa = np.array([p.data.k(key) if p.order_of(key).alpha > 1 else 0.0 for key in keys])
    t = h * np.arange(N + 1)
    y = np.zeros((N + 1, n))
    f = np.zeros((N + 1, n))
    y[0] = beta

    groups = {}
    for row, a in enumerate(alphas):
        groups.setdefault(float(a), []).append(row)
    k = np.arange(N + 2, dtype=float)
    weights = {}
    for a, rows in groups.items():
        bw = (k[:-1] + 1) ** a - k[:-1] ** a
        cw = (k[:-1] + 2) ** (a + 1) + k[:-1] ** (a + 1) - 2 * (k[:-1] + 1) ** (a + 1)
        weights[a] = (np.array(rows), bw, cw, h**a / gamma(a + 1), h**a / gamma(a + 2))

    def evaluate(j: int, yj: np.ndarray) -> np.ndarray:
        out = rhs.free(yj)
        rhs.delayed(y, j, out)
        return out

    f[0] = evaluate(0, y[0])
    for m in range(N):
        taylor = beta + kappa * t[m + 1]
        pred = taylor.copy()
        corr_hist = taylor.copy()
        for a, (rows, bw, cw, sp, sc) in weights.items():
            fr = f[: m + 1][:, rows]
            pred[rows] += sp * (bw[m::-1] @ fr)
            a0 = m ** (a + 1) - (m - a) * (m + 1) ** a
            acc = a0 * fr[0]
            if m >= 1:
                acc = acc + cw[m - 1 :: -1][: m] @ fr[1:]
            corr_hist[rows] += sc * acc
        fp = evaluate(m + 1, pred)
        ynew = corr_hist.copy()
        for a, (rows, _, _, _, sc) in weights.items():
            ynew[rows] += sc * fp[rows]
        y[m + 1] = ynew
        f[m + 1] = evaluate(m + 1, ynew)
    return {key: SampledTrajectory(0.0, h, y[:, j]) for j, key in enumerate(keys)}


def solve_classical(p: FddeProblem) -> Trajectories:
    """RK4 with the method of steps for orders exactly 1 or 2 (Caputo data)."""
    rhs = _Rhs(p)
    keys = rhs.keys
    n = len(keys)
    orders = [p.order_of(key).alpha for key in keys]
    if any(a not in (1.0, 2.0) for a in orders):
        raise DomainError("the classical reference needs integer orders 1 or 2")
    second = np.array([a == 2.0 for a in orders])
    N = p.nsteps
    h = p.h
    y = np.zeros((N + 1, n))
    v = np.zeros((N + 1, n))  # y' on the grid, for Hermite interpolation
    y[0] = [p.data.b(key) for key in keys]
    v0 = np.array([p.data.k(key) for key in keys])

    def hermite(j: int, col: int) -> float:
        return 0.5 * (y[j, col] + y[j + 1, col]) + h * (v[j, col] - v[j + 1, col]) / 8.0

    def accel(j: float, yy: np.ndarray) -> np.ndarray:
        out = rhs.free(yy)
        rhs.delayed(y, j, out, hermite)
        return out

    def deriv(j: float, yy: np.ndarray, vv: np.ndarray):
        a = accel(j, yy)
        dy = np.where(second, vv, a)
        dv = np.where(second, a, 0.0)
        return dy, dv

    vel = np.where(second, v0, 0.0)
    v[0] = np.where(second, vel, accel(0, y[0]))
    for m in range(N):
        k1y, k1v = deriv(m, y[m], vel)
        k2y, k2v = deriv(m + 0.5, y[m] + 0.5 * h * k1y, vel + 0.5 * h * k1v)
        k3y, k3v = deriv(m + 0.5, y[m] + 0.5 * h * k2y, vel + 0.5 * h * k2v)
        k4y, k4v = deriv(m + 1, y[m] + h * k3y, vel + h * k3v)
        y[m + 1] = y[m] + h * (k1y + 2 * k2y + 2 * k3y + k4y) / 6
        vel = vel + h * (k1v + 2 * k2v + 2 * k3v + k4v) / 6
        v[m + 1] = np.where(second, vel, accel(m + 1, y[m + 1]))
    return {key: SampledTrajectory(0.0, h, y[:, j]) for j, key in enumerate(keys)}


def compare(a: Mapping, b: Mapping, rtol: float = 1e-3, atol: float = 1e-8) -> dict:
    """Per key ``max |a - b| / (atol + rtol |b|)`` over the common grid.

    The measure is zero on identical inputs and weights by ``b``, so it is not
    symmetric; pass the reference as ``b``.
    """
    if set(a) != set(b):
        raise DomainError("trajectory sets differ")
    out = {}
    for key in a:
        ta, tb = a[key], b[key]
        va = np.asarray(ta.values if isinstance(ta, SampledTrajectory) else ta, float)
        vb = np.asarray(tb.values if isinstance(tb, SampledTrajectory) else tb, float)
        if va.shape != vb.shape:
            raise DomainError(f"grid mismatch for {key}")
        if isinstance(ta, SampledTrajectory) and isinstance(tb, SampledTrajectory):
            if abs(ta.h - tb.h) > 1e-14 or abs(ta.t0 - tb.t0) > 1e-14:
                raise DomainError(f"grid mismatch for {key}")
        out[key] = float(np.max(np.abs(va - vb) / (atol + rtol * np.abs(vb))))
    return out


# ---------------------------------------------------------------------------
# PDE residual


def apply_operator(op: DROperatorSpec, u, ux, uxx, u_delayed) -> list[np.ndarray]:
    """Evaluate ``R_1, R_2`` pointwise from values and x-derivatives of u1, u2."""
    out = []
    for k in (1, 2):
        s = {name: float(v) for name, v in op.slots(k).items()}
        A = s["a2"] * u[1] + s["a1"] * u[0] + s["a0"]
        Ax = s["a2"] * ux[1] + s["a1"] * ux[0]
        B = s["b2"] * u[1] + s["b1"] * u[0] + s["b0"]
        Bx = s["b2"] * ux[1] + s["b1"] * ux[0]
        r = Ax * ux[0] + A * uxx[0] + Bx * ux[1] + B * uxx[1]
        r = r + s["g5"] * u[0] * u[1] + s["g4"] * u[1] ** 2 + s["g3"] * u[0] ** 2
        r = r + s["g2"] * u[1] + s["g1"] * u[0] + s["g0"]
        r = r + s["gh1"] * u_delayed[0] + s["gh2"] * u_delayed[1]
        out.append(r)
    return out


@dataclass(frozen=True)
class ResidualReport:
    """Residual ``D^alpha u_k - R_k(u)`` on a tensor grid (arrays shaped (2, nt, nx))."""

    t: np.ndarray
    x: np.ndarray
    residual: np.ndarray
    rhs: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residual)))

    def scale(self, k: int | None = None) -> float:
        r = self.rhs if k is None else self.rhs[k - 1]
        return float(np.max(np.abs(r)))

    def normalized(self, k: int | None = None) -> float:
        """Max residual over max |RHS|; per component if ``k`` is given."""
        if k is None:
            return max(self.normalized(1), self.normalized(2))
        return float(np.max(np.abs(self.residual[k - 1]))) / max(self.scale(k), 1e-300)

    def summary(self) -> str:
        return (f"max |residual| = {self.max_abs:.3e}; normalized: "
                f"u1 {self.normalized(1):.3e}, u2 {self.normalized(2):.3e}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "res1", "res2", "rhs1", "rhs2"])
        for it, tv in enumerate(self.t):
            for ix, xv in enumerate(self.x):
                w.writerow([f"{v:.17g}" for v in (tv, xv, self.residual[0, it, ix], self.residual[1, it, ix],
                                                  self.rhs[0, it, ix], self.rhs[1, it, ix])])
        return buf.getvalue()


def _time_derivative(field_, key, order: FracOrder, t_end: float, nfine: int) -> SampledTrajectory:
    """Numerical ``D^alpha delta_key`` on a uniform grid over [0, t_end]."""
    tf = np.linspace(0.0, t_end, nfine + 1)
    vals = np.asarray(field_.delta(key, tf), float)
    traj = SampledTrajectory(0.0, t_end / nfine, np.where(np.isfinite(vals), vals, 0.0))
    a = order.alpha
    if order.kind is FracKind.CAPUTO or a in (1.0, 2.0):
        if a > 1 and a != 2.0:
            # same operator, applied as RL to delta - beta - kappa t (smooth start)
            shifted = traj.values - field_.data.b(key) - field_.data.k(key) * tf
            return rl_derivative(traj.with_values(shifted), FracOrder(a, FracKind.RL))
        return caputo_derivative(traj, order)
    # Any RL solution starts as b t^(a-1)/Gamma(a) + k t^(a-2)/Gamma(a-1); those
    # powers have zero RL derivative, so only the milder remainder is differenced.
    pos = tf > 0
    lead = field_.data.b(key) * tf[pos] ** (a - 1) / gamma(a)
    if a > 1:
        lead = lead + field_.data.k(key) * tf[pos] ** (a - 2) / gamma(a - 1)
    rest = np.zeros_like(tf)
    rest[pos] = vals[pos] - lead
    s = 2 * a - 2 if a > 1 else 2 * a - 1
    s = s if -1 < s < 1 else None
    d = rl_derivative(traj.with_values(rest), order, singular_exponent=s)
    return d


def pde_residual(field_, op: DROperatorSpec, t_range: Sequence[float], x_range: Sequence[float],
                 nt: int = 257, nx: int = 33, nfine: int | None = None) -> ResidualReport:
    """Residual of the full PDE system for a solution field.

    The field must provide ``kind``, ``orders``, ``data``, ``space``,
    ``delta(key, t)`` (history for ``t < 0``) and, for Riemann-Liouville
    fields, ``singular_exponent(key)``.
    """
    t0, t1 = (float(v) for v in t_range)
    x0, x1 = (float(v) for v in x_range)
    if nt < 64:
        raise DomainError("at least 64 time samples are required")
    if not (0 <= t0 < t1) or not (x0 < x1):
        raise DomainError("bad grid ranges")
    kind = field_.orders[0].kind
    tau_min = min(float(v) for v in op.tau)
    if kind is FracKind.RL and t0 < 0.1 * tau_min:
        raise DomainError("Riemann-Liouville residuals start at t >= 0.1 tau")
    t = np.linspace(t0, t1, nt)
    x = np.linspace(x0, x1, nx)
    if nfine is None:
        # the delayed singular layers of RL fields need the finer grid
        nfine = max(8192 if kind is FracKind.RL else 2048, 8 * nt)
    keys = field_.space_keys()
    space = field_.space

    # fractional derivatives of the coordinates, interpolated to the output times
    dvals = {}
    for key in keys:
        d = _time_derivative(field_, key, field_.orders[key[0] - 1], t1, nfine)
        dt = d.times
        ok = dt > 0
        dvals[key] = CubicSpline(dt[ok], d.values[ok])(t)

    u = [np.zeros((nt, nx)) for _ in range(2)]
    ux = [np.zeros((nt, nx)) for _ in range(2)]
    uxx = [np.zeros((nt, nx)) for _ in range(2)]
    ud = [np.zeros((nt, nx)) for _ in range(2)]
    lhs = [np.zeros((nt, nx)) for _ in range(2)]
    for key in keys:
        k, i = key
        psi = space.basis(k)[i - 1]
        p0 = psi.evaluate(x)
        p1 = psi.diff().evaluate(x)
        p2 = psi.diff(2).evaluate(x)
        dk = np.asarray(field_.delta(key, t), float)[:, None]
        dd = np.asarray(field_.delta(key, t - float(op.tau[k - 1])), float)[:, None]
        u[k - 1] += dk * p0
        ux[k - 1] += dk * p1
        uxx[k - 1] += dk * p2
        ud[k - 1] += dd * p0
        lhs[k - 1] += dvals[key][:, None] * p0
    rhs = apply_operator(op, u, ux, uxx, ud)
    res = np.stack([lhs[0] - rhs[0], lhs[1] - rhs[1]])
    return ResidualReport(t, x, res, np.stack(rhs))
