"""Quadratic diffusion-reaction operators with linear delays, invariance and reduction.

For ``k = 1, 2`` the operator is::

    R_k = d/dx[(a_k2 u2 + a_k1 u1 + a_k0) u1_x + (b_k2 u2 + b_k1 u1 + b_k0) u2_x]
          + g_k5 u1 u2 + g_k4 u2^2 + g_k3 u1^2 + g_k2 u2 + g_k1 u1 + g_k0
          + gh_k1 u1(t - tau_1) + gh_k2 u2(t - tau_2)

A product space ``Y1 x Y2`` is invariant when substituting
``u_k = sum_i delta_ki psi_ki`` leaves every ``R_k`` inside ``Y_k``. The
coordinates of ``R_k`` on ``Y_k`` then define the reduced delay ODEs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from fracdr.errors import DomainError, NotInvariantError, SchemaError
from fracdr.symalg import (
    COS,
    NONE,
    SIN,
    DeltaPoly,
    EptFunction,
    LinearOdeSpec,
    basis_from_lode,
    delta,
    delta_hat,
    ept_diff,
    ept_project,
    to_number,
)

__all__ = [
    "SLOTS",
    "DROperatorSpec",
    "SpacePair",
    "DelayTerm",
    "ReducedSystem",
    "InvarianceReport",
    "slot_functions",
    "expand",
    "check_invariance",
    "reduce",
    "annihilate",
    "number_to_json",
    "number_from_json",
    "load_spec",
    "dump_spec",
]

# Coefficient slots of one component, in a fixed order.
SLOTS = ("a0", "a1", "a2", "b0", "b1", "b2", "g0", "g1", "g2", "g3", "g4", "g5", "gh1", "gh2")


def number_to_json(c):
    """Exact-preserving JSON encoding: plain number when lossless, else "p/q"."""
    c = to_number(c)
    if isinstance(c, float):
        return c
    if c.denominator == 1:
        return c.numerator
    f = float(c)
    if Fraction(repr(f)) == c:
        return f
    return f"{c.numerator}/{c.denominator}"


def number_from_json(v, pointer: str = ""):
    if isinstance(v, bool) or v is None:
        raise SchemaError(pointer, f"expected a number, got {v!r}")
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise SchemaError(pointer, f"cannot parse number {v!r}") from None
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise SchemaError(pointer, "non-finite number")
        return Fraction(repr(v))
    raise SchemaError(pointer, f"expected a number, got {type(v).__name__}")


def _matrix(value, rows: int, cols: int, pointer: str) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != rows:
        raise SchemaError(pointer, f"expected {rows} rows")
    out = []
    for r, row in enumerate(value):
        if not isinstance(row, (list, tuple)) or len(row) != cols:
            raise SchemaError(f"{pointer}/{r}", f"expected {cols} entries")
        out.append(tuple(number_from_json(v, f"{pointer}/{r}/{c}") for c, v in enumerate(row)))
    return tuple(out)


@dataclass(frozen=True)
class DROperatorSpec:
    """Coefficients of the two-component operator.

    ``a[k][j]``, ``b[k][j]`` for ``j = 0, 1, 2``; ``gamma[k][l]`` for the
    reaction terms (constant, u1, u2, u1^2, u2^2, u1 u2); ``gamma_hat[k][j]``
    multiplies the delayed ``u_{j+1}``; ``tau[j]`` is the delay of component j.
    Component indices here are zero-based.
    """

    a: tuple = ((0, 0, 0), (0, 0, 0))
    b: tuple = ((0, 0, 0), (0, 0, 0))
    gamma: tuple = ((0,) * 6, (0,) * 6)
    gamma_hat: tuple = ((0, 0), (0, 0))
    tau: tuple = (1, 1)

    def __post_init__(self) -> None:
        shapes = {"a": (2, 3), "b": (2, 3), "gamma": (2, 6), "gamma_hat": (2, 2)}
        for name, (r, c) in shapes.items():
            val = getattr(self, name)
            try:
                mat = tuple(tuple(to_number(v) for v in row) for row in val)
            except (TypeError, DomainError) as exc:
                raise DomainError(f"{name}: {exc}") from None
            if len(mat) != r or any(len(row) != c for row in mat):
                raise DomainError(f"{name} must have shape {r}x{c}")
            object.__setattr__(self, name, mat)
        tau = tuple(to_number(t) for t in self.tau)
        if len(tau) != 2 or not all(t > 0 for t in tau):
            raise DomainError("tau must hold two positive delays")
        object.__setattr__(self, "tau", tau)

    @classmethod
    def from_names(cls, coeffs: Mapping[str, object], tau=(1, 1)) -> "DROperatorSpec":
        """Build from names such as ``a12``, ``b20``, ``g15`` (gamma_15), ``gh11``."""
        slots = {}
        for name, v in coeffs.items():
            for prefix in ("gh", "a", "b", "g"):
                if name.startswith(prefix) and len(name) == len(prefix) + 2 and name[len(prefix):].isdigit():
                    k, j = int(name[-2]), int(name[-1])
                    slots[(k, f"{prefix}{j}")] = v
                    break
            else:
                raise DomainError(f"unknown coefficient name {name!r}")
        return cls().with_slots(slots, tau=tau)

    def slot(self, k: int, name: str):
        """Coefficient of slot ``name`` in component ``k`` (1-based)."""
        prefix, j = name[:-1], int(name[-1])
        row = k - 1
        if prefix == "a":
            return self.a[row][j]
        if prefix == "b":
            return self.b[row][j]
        if prefix == "g":
            return self.gamma[row][j]
        if prefix == "gh":
            return self.gamma_hat[row][j - 1]
        raise DomainError(f"unknown slot {name!r}")

    def slots(self, k: int) -> dict[str, Fraction | float]:
        return {s: self.slot(k, s) for s in SLOTS}

    def with_slots(self, values: Mapping[tuple[int, str], object], tau=None) -> "DROperatorSpec":
        mats = {n: [list(r) for r in getattr(self, n)] for n in ("a", "b", "gamma", "gamma_hat")}
        for (k, name), v in values.items():
            if name not in SLOTS or k not in (1, 2):
                raise DomainError(f"unknown slot {(k, name)!r}")
            prefix, j = name[:-1], int(name[-1])
            target = {"a": "a", "b": "b", "g": "gamma", "gh": "gamma_hat"}[prefix]
            mats[target][k - 1][j - 1 if prefix == "gh" else j] = v
        return replace(self, **{n: tuple(tuple(r) for r in m) for n, m in mats.items()},
                       tau=self.tau if tau is None else tau)

    def scaled(self, c) -> "DROperatorSpec":
        c = to_number(c)
        return self.with_slots({(k, s): self.slot(k, s) * c for k in (1, 2) for s in SLOTS})

    def to_json_dict(self) -> dict:
        enc = lambda m: [[number_to_json(v) for v in row] for row in m]  # noqa: E731
        return {
            "a": enc(self.a),
            "b": enc(self.b),
            "gamma": enc(self.gamma),
            "gamma_hat": enc(self.gamma_hat),
            "tau": [number_to_json(t) for t in self.tau],
        }

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "DROperatorSpec":
        if not isinstance(d, Mapping):
            raise SchemaError("", "expected a JSON object")
        for key in ("a", "b", "gamma", "gamma_hat", "tau"):
            if key not in d:
                raise SchemaError(f"/{key}", "missing field")
        tau = d["tau"]
        if not isinstance(tau, list) or len(tau) != 2:
            raise SchemaError("/tau", "expected two delays")
        taus = tuple(number_from_json(t, f"/tau/{i}") for i, t in enumerate(tau))
        for i, t in enumerate(taus):
            if not t > 0:
                raise SchemaError(f"/tau/{i}", "delay must be positive")
        return cls(
            a=_matrix(d["a"], 2, 3, "/a"),
            b=_matrix(d["b"], 2, 3, "/b"),
            gamma=_matrix(d["gamma"], 2, 6, "/gamma"),
            gamma_hat=_matrix(d["gamma_hat"], 2, 2, "/gamma_hat"),
            tau=taus,
        )


def _ode_from_basis(basis: Sequence[EptFunction]) -> LinearOdeSpec | None:
    """Monic order-2 ODE whose fundamental set spans ``basis`` (None if unknown)."""
    if len(basis) != 2:
        return None
    (k1, _), = basis[0]
    (k2, _), = basis[1]
    if k1.trig == NONE and k2.trig == NONE:
        if k1.power == k2.power == 0 and k1.rate != k2.rate:
            r1, r2 = k1.rate, k2.rate
        elif k1.rate == k2.rate and {k1.power, k2.power} == {0, 1}:
            r1 = r2 = k1.rate
        else:
            return None
        return LinearOdeSpec((r1 * r2, -(r1 + r2)))
    if {k1.trig, k2.trig} == {SIN, COS} and k1.rate == k2.rate and k1.omega == k2.omega:
        a, w = k1.rate, k1.omega
        return LinearOdeSpec((a * a + w * w, -2 * a))
    return None


@dataclass(frozen=True)
class SpacePair:
    """Candidate space ``Y1 x Y2`` given by single-term bases for each component."""

    basis1: tuple
    basis2: tuple
    ode1: LinearOdeSpec | None = None
    ode2: LinearOdeSpec | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "basis1", tuple(self.basis1))
        object.__setattr__(self, "basis2", tuple(self.basis2))
        if not self.basis1 or not self.basis2:
            raise DomainError("each component needs a non-empty basis")
        if self.ode1 is None:
            object.__setattr__(self, "ode1", _ode_from_basis(self.basis1))
        if self.ode2 is None:
            object.__setattr__(self, "ode2", _ode_from_basis(self.basis2))

    @classmethod
    def from_lode(cls, spec1: LinearOdeSpec, spec2: LinearOdeSpec) -> "SpacePair":
        return cls(tuple(basis_from_lode(spec1)), tuple(basis_from_lode(spec2)), spec1, spec2)

    @classmethod
    def from_mu(cls, mu1: Sequence, mu2: Sequence) -> "SpacePair":
        return cls.from_lode(LinearOdeSpec(tuple(mu1)), LinearOdeSpec(tuple(mu2)))

    @property
    def dims(self) -> tuple[int, int]:
        return len(self.basis1), len(self.basis2)

    @property
    def n(self) -> int:
        return sum(self.dims)

    def basis(self, k: int) -> tuple:
        return self.basis1 if k == 1 else self.basis2

    def ode(self, k: int) -> LinearOdeSpec | None:
        return self.ode1 if k == 1 else self.ode2

    def field(self, k: int, hat: bool = False) -> EptFunction:
        """``u_k`` (or its delayed copy) as a symbolic combination of the basis."""
        var = delta_hat if hat else delta
        out = EptFunction()
        for i, psi in enumerate(self.basis(k), start=1):
            out = out + psi * var(k, i)
        return out

    def to_json_dict(self) -> dict:
        if self.ode1 is None or self.ode2 is None:
            raise DomainError("space has no ODE description")
        return {"mu": [[number_to_json(m) for m in self.ode1.mu], [number_to_json(m) for m in self.ode2.mu]]}

    @classmethod
    def from_json_dict(cls, d: Mapping, pointer: str = "/space") -> "SpacePair":
        if not isinstance(d, Mapping) or "mu" not in d:
            raise SchemaError(f"{pointer}/mu", "missing field")
        mu = d["mu"]
        if not isinstance(mu, list) or len(mu) != 2:
            raise SchemaError(f"{pointer}/mu", "expected two rows")
        specs = []
        for k, row in enumerate(mu):
            if not isinstance(row, list) or not 1 <= len(row) <= 3:
                raise SchemaError(f"{pointer}/mu/{k}", "expected 1 to 3 coefficients")
            specs.append(LinearOdeSpec(tuple(number_from_json(v, f"{pointer}/mu/{k}/{i}") for i, v in enumerate(row))))
        return cls.from_lode(*specs)


def slot_functions(space: SpacePair) -> dict[str, EptFunction]:
    """The EPT expression multiplying each coefficient slot (same for both components)."""
    u1, u2 = space.field(1), space.field(2)
    d1, d2 = ept_diff(u1), ept_diff(u2)
    one = EptFunction.const(1)
    weights = {"0": one, "1": u1, "2": u2}
    out = {}
    for j, w in weights.items():
        out["a" + j] = ept_diff(w * d1)
        out["b" + j] = ept_diff(w * d2)
    out["g0"] = one
    out["g1"] = u1
    out["g2"] = u2
    out["g3"] = u1 * u1
    out["g4"] = u2 * u2
    out["g5"] = u1 * u2
    out["gh1"] = space.field(1, hat=True)
    out["gh2"] = space.field(2, hat=True)
    return out


def expand(op: DROperatorSpec, space: SpacePair, phis: Mapping[str, EptFunction] | None = None):
    """Symbolic ``(R_1, R_2)`` after substituting the basis expansions."""
    phis = phis or slot_functions(space)
    out = []
    for k in (1, 2):
        r = EptFunction()
        for s in SLOTS:
            c = op.slot(k, s)
            if c != 0:
                r = r + phis[s] * c
        out.append(r)
    return tuple(out)


@dataclass(frozen=True)
class DelayTerm:
    """``coef * delta_{component,index}(t - tau)``."""

    coef: Fraction | float
    component: int
    index: int
    tau: Fraction | float


def _var_index(var, dims) -> int:
    _, k, i = var
    return (i - 1) if k == 1 else dims[0] + i - 1


@dataclass(frozen=True)
class ReducedSystem:
    """Right-hand sides ``D^{alpha_k} delta_ki = Lambda_ki + sum(delay terms)``.

    ``lam`` and ``delays`` are keyed by ``(k, i)`` (1-based). The state vector
    used by :meth:`rhs` lists ``delta_11..delta_1n1`` then ``delta_21..``.
    """

    dims: tuple
    lam: Mapping
    delays: Mapping
    tau: tuple
    alpha: tuple = (None, None)

    def keys(self) -> list[tuple[int, int]]:
        return [(k, i) for k in (1, 2) for i in range(1, self.dims[k - 1] + 1)]

    def with_orders(self, alpha: Sequence[float]) -> "ReducedSystem":
        return replace(self, alpha=tuple(alpha))

    def compiled(self):
        """Dense arrays ``(c, L, Q, D)`` with ``rhs = c + L y + y^T Q y + D y_delayed``."""
        n = sum(self.dims)
        c = np.zeros(n)
        lin = np.zeros((n, n))
        quad = np.zeros((n, n, n))
        dmat = np.zeros((n, n))
        for row, key in enumerate(self.keys()):
            for mono, coef in self.lam[key].terms.items():
                idx = [_var_index(v, self.dims) for v in mono]
                if len(idx) == 0:
                    c[row] += float(coef)
                elif len(idx) == 1:
                    lin[row, idx[0]] += float(coef)
                elif len(idx) == 2:
                    quad[row, idx[0], idx[1]] += float(coef)
                else:
                    raise DomainError("reduced right-hand side above quadratic order")
            for d in self.delays[key]:
                dmat[row, _var_index((1, d.component, d.index), self.dims)] += float(d.coef)
        return c, lin, quad, dmat

    def rhs(self, y, y_delayed) -> np.ndarray:
        c, lin, quad, dmat = self.compiled()
        y = np.asarray(y, float)
        return c + lin @ y + np.einsum("rij,i,j->r", quad, y, y) + dmat @ np.asarray(y_delayed, float)

    def delay_of(self, k: int):
        return self.tau[k - 1]

    def pretty(self) -> str:
        lines = []
        for k, i in self.keys():
            order = f"alpha_{k}" if self.alpha[k - 1] is None else repr(float(self.alpha[k - 1]))
            parts = [] if self.lam[(k, i)].is_zero() else [str(self.lam[(k, i)])]
            for d in self.delays[(k, i)]:
                coef = "" if d.coef == 1 else f"{d.coef}*"
                parts.append(f"{coef}delta_{d.component}{d.index}(t - {d.tau})")
            rhs = " + ".join(parts).replace("+ -", "- ") if parts else "0"
            lines.append(f"D^{order} delta_{k}{i}(t) = {rhs}")
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        eqs = []
        for k, i in self.keys():
            eqs.append({
                "k": k,
                "i": i,
                "lambda": [
                    {"monomial": [["delta", v[1], v[2]] for v in mono], "coef": number_to_json(c)}
                    for mono, c in self.lam[(k, i)].items()
                ],
                "delays": [
                    {"coef": number_to_json(d.coef), "component": d.component, "index": d.index,
                     "tau": number_to_json(d.tau)}
                    for d in self.delays[(k, i)]
                ],
            })
        alpha = [None if a is None else float(a) for a in self.alpha]
        return {"dims": list(self.dims), "tau": [number_to_json(t) for t in self.tau], "alpha": alpha, "equations": eqs}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "ReducedSystem":
        try:
            dims = tuple(int(x) for x in d["dims"])
            tau = tuple(number_from_json(t, f"/tau/{j}") for j, t in enumerate(d["tau"]))
            alpha = tuple(d.get("alpha", (None, None)))
            lam, delays = {}, {}
            for q, eq in enumerate(d["equations"]):
                key = (int(eq["k"]), int(eq["i"]))
                terms = {}
                for r, t in enumerate(eq["lambda"]):
                    mono = tuple((0, int(v[1]), int(v[2])) for v in t["monomial"])
                    terms[mono] = number_from_json(t["coef"], f"/equations/{q}/lambda/{r}/coef")
                lam[key] = DeltaPoly(terms)
                delays[key] = tuple(
                    DelayTerm(number_from_json(x["coef"], f"/equations/{q}/delays/{r}/coef"),
                              int(x["component"]), int(x["index"]),
                              number_from_json(x["tau"], f"/equations/{q}/delays/{r}/tau"))
                    for r, x in enumerate(eq["delays"])
                )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError("", f"malformed reduced system: {exc}") from None
        out = cls(dims, lam, delays, tau, alpha)
        missing = set(out.keys()) - set(lam)
        if missing:
            raise SchemaError("/equations", f"missing equations for {sorted(missing)}")
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReducedSystem):
            return NotImplemented
        return (self.dims == other.dims and self.tau == other.tau
                and all(self.lam[k] == other.lam[k] for k in self.keys())
                and all(tuple(self.delays[k]) == tuple(other.delays[k]) for k in self.keys()))

    __hash__ = None


@dataclass(frozen=True)
class InvarianceReport:
    invariant: bool
    remainders: tuple
    expanded: tuple
    reduced: ReducedSystem | None = None

    def summary(self) -> str:
        lines = [f"invariant: {'yes' if self.invariant else 'no'}"]
        for k, rem in enumerate(self.remainders, start=1):
            if not rem.is_zero():
                lines.append(f"remainder R_{k}:")
                for key, c in rem:
                    lines.append(f"  [{key}] {c}")
        return "\n".join(lines)


def _build_reduced(op: DROperatorSpec, space: SpacePair, coords: Sequence[Sequence[DeltaPoly]]) -> ReducedSystem:
    lam, delays = {}, {}
    for k in (1, 2):
        for i, c in enumerate(coords[k - 1], start=1):
            free, delayed = c.split_delayed()
            lam[(k, i)] = free
            delays[(k, i)] = tuple(
                DelayTerm(coef, v[1], v[2], op.tau[v[1] - 1]) for v, coef in sorted(delayed.items())
            )
    return ReducedSystem(space.dims, lam, delays, op.tau)


def check_invariance(op: DROperatorSpec, space: SpacePair) -> InvarianceReport:
    """Expand both components, project onto the bases and inspect the remainders."""
    expanded = expand(op, space)
    coords, rems = [], []
    for k in (1, 2):
        c, r = ept_project(expanded[k - 1], list(space.basis(k)))
        coords.append(c)
        rems.append(r)
    invariant = all(r.is_zero() for r in rems)
    reduced = _build_reduced(op, space, coords) if invariant else None
    return InvarianceReport(invariant, tuple(rems), expanded, reduced)


def reduce(op: DROperatorSpec, space: SpacePair) -> ReducedSystem:
    report = check_invariance(op, space)
    if not report.invariant:
        raise NotInvariantError(report.summary())
    return report.reduced


def _root_factors(basis: Iterable[EptFunction]):
    """Factors of the minimal annihilator of a single-term basis."""
    real: dict = {}
    pairs: dict = {}
    for b in basis:
        (key, _), = b
        if key.trig == NONE:
            real[key.rate] = max(real.get(key.rate, 0), key.power + 1)
        else:
            pk = (key.rate, key.omega)
            pairs[pk] = max(pairs.get(pk, 0), key.power + 1)
    return real, pairs


def annihilate(basis: Sequence[EptFunction], f: EptFunction) -> EptFunction:
    """Apply the minimal constant-coefficient operator that kills every basis element."""
    real, pairs = _root_factors(basis)
    for r, mult in real.items():
        for _ in range(mult):
            f = ept_diff(f) - f * r
    for (a, w), mult in pairs.items():
        for _ in range(mult):
            d = ept_diff(f)
            f = ept_diff(d) - d * (2 * a) + f * (a * a + w * w)
    return f


def load_spec(text: str) -> tuple[DROperatorSpec, SpacePair]:
    """Parse the JSON operator/space document."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from None
    op = DROperatorSpec.from_json_dict(d)
    if "space" not in d:
        raise SchemaError("/space", "missing field")
    return op, SpacePair.from_json_dict(d["space"])


def dump_spec(op: DROperatorSpec, space: SpacePair) -> str:
    d = op.to_json_dict()
    d["space"] = space.to_json_dict()
    return json.dumps(d, indent=2)
