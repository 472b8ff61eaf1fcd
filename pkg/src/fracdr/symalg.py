"""Exact algebra of exponential-polynomial-trigonometric (EPT) functions.

An :class:`EptFunction` is a finite sum of terms ``c * x**m * exp(r*x) * T(w*x)``
with ``T`` one of ``1``, ``cos`` or ``sin``. The coefficients ``c`` are
:class:`DeltaPoly` polynomials in the time-dependent coordinates
``delta[k,i]`` and their delayed copies ``delta_hat[k,i]``. Products and
derivatives stay inside the algebra, so closure of a space under a
polynomial differential operator can be decided by comparing term keys.

Numbers are kept as :class:`fractions.Fraction` whenever the inputs are
rational; irrational rates (e.g. square roots) fall back to floats, with
coefficients below ``ZERO_TOL`` snapped to zero, and rates/frequencies
that agree to about 1e-12 share one representative so that their keys merge.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Iterable, Iterator, Mapping

import numpy as np

from fracdr.errors import AmbiguousBasisError, DomainError

__all__ = [
    "Var",
    "DeltaPoly",
    "EptFunction",
    "LinearOdeSpec",
    "delta",
    "delta_hat",
    "ept_mul",
    "ept_diff",
    "ept_project",
    "basis_from_lode",
    "apply_lode",
    "exact_sqrt",
    "to_number",
    "NONE",
    "COS",
    "SIN",
]

ZERO_TOL = 1e-12

NONE, COS, SIN = 0, 1, 2
_TRIG_NAMES = {NONE: "", COS: "cos", SIN: "sin"}
_HALF = Fraction(1, 2)


def to_number(x) -> Fraction | float:
    """Convert to an exact Fraction if rational, else a float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not coefficients")
    if isinstance(x, (int, np.integer, Rational)):
        return Fraction(int(x)) if isinstance(x, (int, np.integer)) else Fraction(x)
    if isinstance(x, (float, np.floating, Real)):
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"non-finite coefficient {x}")
        if x == int(x) and abs(x) < 2**53:
            return Fraction(int(x))
        return x
    raise TypeError(f"unsupported number type {type(x).__name__}")


_KEY_TOL = 1e-12
_reps: list[float] = []
_reps_lock = threading.Lock()


def _key_number(x) -> Fraction | float:
    """Normalise a rate or frequency for use inside a term key.

    Floats close to a simple rational become that rational. Other floats are
    interned: the first value seen within ``_KEY_TOL`` of ``x`` is returned,
    so keys computed along different arithmetic paths compare equal.
    """
    x = to_number(x)
    if isinstance(x, Fraction):
        return x
    approx = Fraction(x).limit_denominator(1000)
    if abs(float(approx) - x) <= _KEY_TOL * max(1.0, abs(x)):
        return approx
    tol = _KEY_TOL * max(1.0, abs(x))
    with _reps_lock:
        j = bisect.bisect_left(_reps, x)
        for cand in _reps[max(0, j - 1):j + 1]:
            if abs(cand - x) <= tol:
                return cand
        _reps.insert(j, x)
    return x


def _is_zero(c) -> bool:
    return c == 0 if isinstance(c, Fraction) else abs(c) <= ZERO_TOL


def exact_sqrt(x) -> Fraction | float:
    """Square root, exact when ``x`` is the square of a rational."""
    x = to_number(x)
    if x < 0:
        raise DomainError(f"square root of negative number {x}")
    if isinstance(x, Fraction):
        n, d = x.numerator, x.denominator
        rn, rd = math.isqrt(n), math.isqrt(d)
        if rn * rn == n and rd * rd == d:
            return Fraction(rn, rd)
        return math.sqrt(float(x))
    return math.sqrt(x)


def _fmt(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(c)


# ---------------------------------------------------------------------------
# DeltaPoly


Var = tuple  # (hat, k, i): hat = 0 for delta, 1 for delayed delta_hat


def _var_name(v: Var) -> str:
    hat, k, i = v
    return f"{'delta_hat' if hat else 'delta'}_{k}{i}"


class DeltaPoly:
    """Sparse multivariate polynomial in the delta / delta_hat variables."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple, object] | None = None):
        clean: dict[tuple, Fraction | float] = {}
        if terms:
            for mono, c in terms.items():
                mono = tuple(sorted(mono))
                c = to_number(c)
                if mono in clean:
                    c = clean[mono] + c
                clean[mono] = c
        self._terms = {m: c for m, c in clean.items() if not _is_zero(c)}
        self._hash = None

    @classmethod
    def const(cls, c) -> "DeltaPoly":
        return cls({(): c})

    @classmethod
    def var(cls, v: Var) -> "DeltaPoly":
        return cls({(tuple(v),): 1})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((len(m) for m in self._terms), default=0)

    def variables(self) -> set:
        return {v for m in self._terms for v in m}

    def coefficient(self, monomial: Iterable[Var] = ()) -> Fraction | float:
        return self._terms.get(tuple(sorted(tuple(v) for v in monomial)), Fraction(0))

    def _coerce(self, other) -> "DeltaPoly":
        if isinstance(other, DeltaPoly):
            return other
        return DeltaPoly.const(other)

    def __add__(self, other):
        if isinstance(other, EptFunction):
            return NotImplemented
        other = self._coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out[m] + c if m in out else c
        return DeltaPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return DeltaPoly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, EptFunction):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, EptFunction):
            return NotImplemented
        if not isinstance(other, DeltaPoly):
            c = to_number(other)
            return DeltaPoly({m: v * c for m, v in self._terms.items()})
        out: dict[tuple, Fraction | float] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(sorted(m1 + m2))
                out[m] = out[m] + c1 * c2 if m in out else c1 * c2
        return DeltaPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, DeltaPoly):
            try:
                other = DeltaPoly.const(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def close_to(self, other: "DeltaPoly", tol: float = 1e-9) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(abs(float(self.coefficient(k) - other.coefficient(k))) <= tol for k in keys)

    def evaluate(self, values: Mapping[Var, float]) -> float:
        total = 0.0
        for mono, c in self._terms.items():
            term = float(c)
            for v in mono:
                term *= values[v]
            total += term
        return total

    def split_delayed(self) -> tuple["DeltaPoly", dict[Var, Fraction | float]]:
        """Separate delay-free terms from terms linear in one delta_hat.

        Raises ``ValueError`` if a delayed variable appears nonlinearly.
        """
        free: dict[tuple, Fraction | float] = {}
        delayed: dict[Var, Fraction | float] = {}
        for mono, c in self._terms.items():
            hats = [v for v in mono if v[0] == 1]
            if not hats:
                free[mono] = c
            elif len(mono) == 1:
                delayed[mono[0]] = c
            else:
                raise ValueError(f"delayed variable enters nonlinearly in {self}")
        return DeltaPoly(free), delayed

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.items():
            names = "*".join(
                _var_name(v) + (f"^{mono.count(v)}" if mono.count(v) > 1 else "")
                for v in sorted(set(mono))
            )
            if not mono:
                parts.append(_fmt(c))
            elif c == 1:
                parts.append(names)
            elif c == -1:
                parts.append("-" + names)
            else:
                parts.append(f"{_fmt(c)}*{names}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"DeltaPoly({self})"


def delta(k: int, i: int) -> DeltaPoly:
    return DeltaPoly.var((0, k, i))


def delta_hat(k: int, i: int) -> DeltaPoly:
    return DeltaPoly.var((1, k, i))


# ---------------------------------------------------------------------------
# EPT functions


@dataclass(frozen=True, order=True)
class TermKey:
    """Shape of one EPT term: ``x**power * exp(rate*x) * trig(omega*x)``."""

    power: int
    rate: Fraction | float
    trig: int = NONE
    omega: Fraction | float = Fraction(0)

    def __str__(self) -> str:
        parts = []
        if self.power == 1:
            parts.append("x")
        elif self.power > 1:
            parts.append(f"x^{self.power}")
        if self.rate != 0:
            parts.append(f"exp({_fmt(self.rate)}*x)")
        if self.trig != NONE:
            parts.append(f"{_TRIG_NAMES[self.trig]}({_fmt(self.omega)}*x)")
        return "*".join(parts) if parts else "1"


def _normalise(trig: int, omega) -> list[tuple[Fraction, int, Fraction | float]]:
    """Fold sign and zero frequency into (factor, trig, omega) triples."""
    omega = _key_number(omega)
    if trig == NONE:
        return [(Fraction(1), NONE, Fraction(0))]
    if omega == 0:
        return [(Fraction(1), NONE, Fraction(0))] if trig == COS else []
    if omega < 0:
        return [(Fraction(1) if trig == COS else Fraction(-1), trig, -omega)]
    return [(Fraction(1), trig, omega)]


def make_key(power: int = 0, rate=0, trig: int = NONE, omega=0) -> list[tuple[Fraction, TermKey]]:
    if power < 0:
        raise DomainError("negative power of x")
    return [
        (f, TermKey(int(power), _key_number(rate), t, w))
        for f, t, w in _normalise(trig, omega)
    ]


def _trig_product(t1: int, w1, t2: int, w2) -> list[tuple[Fraction, int, object]]:
    if t1 == NONE:
        return [(Fraction(1), t2, w2)]
    if t2 == NONE:
        return [(Fraction(1), t1, w1)]
    s, d = w1 + w2, w1 - w2
    if t1 == COS and t2 == COS:
        return [(_HALF, COS, d), (_HALF, COS, s)]
    if t1 == SIN and t2 == SIN:
        return [(_HALF, COS, d), (-_HALF, COS, s)]
    if t1 == SIN and t2 == COS:
        return [(_HALF, SIN, s), (_HALF, SIN, d)]
    return [(_HALF, SIN, s), (-_HALF, SIN, d)]


class EptFunction:
    """Canonical finite EPT sum with :class:`DeltaPoly` coefficients.

    Terms with identical keys are merged and zero coefficients dropped, so
    ``==`` on two instances is functional equality.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[TermKey, DeltaPoly] | None = None):
        clean: dict[TermKey, DeltaPoly] = {}
        for key, c in (terms or {}).items():
            c = c if isinstance(c, DeltaPoly) else DeltaPoly.const(c)
            clean[key] = clean[key] + c if key in clean else c
        self._terms = {k: c for k, c in clean.items() if not c.is_zero()}

    @classmethod
    def term(cls, coef=1, power: int = 0, rate=0, trig: int = NONE, omega=0) -> "EptFunction":
        coef = coef if isinstance(coef, DeltaPoly) else DeltaPoly.const(coef)
        out: dict[TermKey, DeltaPoly] = {}
        for f, key in make_key(power, rate, trig, omega):
            out[key] = out[key] + coef * f if key in out else coef * f
        return cls(out)

    @classmethod
    def const(cls, c) -> "EptFunction":
        return cls.term(c)

    @classmethod
    def zero(cls) -> "EptFunction":
        return cls()

    @property
    def terms(self) -> dict[TermKey, DeltaPoly]:
        return dict(self._terms)

    def keys(self) -> list[TermKey]:
        return sorted(self._terms, key=_key_sort)

    def coefficient(self, key: TermKey) -> DeltaPoly:
        return self._terms.get(key, DeltaPoly())

    def is_zero(self) -> bool:
        return not self._terms

    def __iter__(self) -> Iterator[tuple[TermKey, DeltaPoly]]:
        return iter(sorted(self._terms.items(), key=lambda kv: _key_sort(kv[0])))

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other):
        other = _as_ept(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out[k] + c if k in out else c
        return EptFunction(out)

    __radd__ = __add__

    def __neg__(self):
        return EptFunction({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-_as_ept(other))

    def __rsub__(self, other):
        return _as_ept(other) - self

    def __mul__(self, other):
        if isinstance(other, EptFunction):
            return ept_mul(self, other)
        if isinstance(other, DeltaPoly):
            return EptFunction({k: c * other for k, c in self._terms.items()})
        c = to_number(other)
        return EptFunction({k: v * c for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, EptFunction):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def close_to(self, other: "EptFunction", tol: float = 1e-9) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(self.coefficient(k).close_to(other.coefficient(k), tol) for k in keys)

    def diff(self, order: int = 1) -> "EptFunction":
        f = self
        for _ in range(order):
            f = ept_diff(f)
        return f

    def substitute(self, values: Mapping[Var, float]) -> "EptFunction":
        """Replace every delta variable by a number."""
        return EptFunction({k: DeltaPoly.const(c.evaluate(values)) for k, c in self._terms.items()})

    def evaluate(self, x, values: Mapping[Var, float] | None = None):
        """Numeric value at ``x`` (scalar or array); coefficients evaluated at ``values``."""
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for key, c in self._terms.items():
            cv = c.evaluate(values or {})
            if cv == 0.0:
                continue
            val = cv * x**key.power if key.power else np.full_like(x, cv)
            if key.rate != 0:
                val = val * np.exp(float(key.rate) * x)
            if key.trig == COS:
                val = val * np.cos(float(key.omega) * x)
            elif key.trig == SIN:
                val = val * np.sin(float(key.omega) * x)
            total = total + val
        return float(total) if total.ndim == 0 else total

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for key, c in self:
            cs = str(c)
            if len(c.terms) > 1:
                cs = f"({cs})"
            if str(key) == "1":
                parts.append(cs)
            elif cs in ("1", "-1"):
                parts.append(("-" if cs == "-1" else "") + str(key))
            else:
                parts.append(f"{cs}*{key}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"EptFunction({self})"


def _key_sort(k: TermKey):
    return (k.trig, float(k.omega), float(k.rate), k.power)


def _as_ept(x) -> EptFunction:
    if isinstance(x, EptFunction):
        return x
    return EptFunction.const(x)


def ept_mul(f: EptFunction, g: EptFunction) -> EptFunction:
    """Exact product; trig products are rewritten as sums."""
    out: dict[TermKey, DeltaPoly] = {}
    for k1, c1 in f._terms.items():
        for k2, c2 in g._terms.items():
            coef = c1 * c2
            power = k1.power + k2.power
            rate = k1.rate + k2.rate
            for factor, trig, omega in _trig_product(k1.trig, k1.omega, k2.trig, k2.omega):
                for f2, key in make_key(power, rate, trig, omega):
                    c = coef * (factor * f2)
                    out[key] = out[key] + c if key in out else c
    return EptFunction(out)


def ept_diff(f: EptFunction) -> EptFunction:
    """Exact first derivative in x."""
    out = EptFunction()
    for k, c in f._terms.items():
        if k.power:
            out = out + EptFunction({TermKey(k.power - 1, k.rate, k.trig, k.omega): c * k.power})
        if k.rate != 0:
            out = out + EptFunction({k: c * k.rate})
        if k.trig == COS:
            out = out + EptFunction({TermKey(k.power, k.rate, SIN, k.omega): c * (-k.omega)})
        elif k.trig == SIN:
            out = out + EptFunction({TermKey(k.power, k.rate, COS, k.omega): c * k.omega})
    return out


def ept_project(f: EptFunction, basis: list[EptFunction]) -> tuple[list[DeltaPoly], EptFunction]:
    """Split ``f`` into coordinates on a single-term basis plus a remainder.

    ``f == sum(coords[i] * basis[i]) + remainder`` holds exactly, and the
    remainder only has keys outside the basis.
    """
    index: dict[TermKey, tuple[int, DeltaPoly]] = {}
    for i, b in enumerate(basis):
        if len(b) != 1:
            raise ValueError("projection needs single-term basis functions")
        (key, c), = b._terms.items()
        if c.degree() != 0:
            raise ValueError("basis coefficients must be constants")
        if key in index:
            raise AmbiguousBasisError(f"basis functions {index[key][0]} and {i} share key {key}")
        index[key] = (i, c)
    coords = [DeltaPoly() for _ in basis]
    rest: dict[TermKey, DeltaPoly] = {}
    for key, c in f._terms.items():
        if key in index:
            i, bc = index[key]
            coords[i] = c * (1 / to_number(bc.coefficient()))
        else:
            rest[key] = c
    return coords, EptFunction(rest)


# ---------------------------------------------------------------------------
# Linear ODEs and their fundamental sets


@dataclass(frozen=True)
class LinearOdeSpec:
    """Monic constant-coefficient ODE ``D^n + mu[n-1] D^(n-1) + ... + mu[0] = 0``."""

    mu: tuple

    def __post_init__(self) -> None:
        mu = tuple(to_number(m) for m in self.mu)
        if not 1 <= len(mu) <= 3:
            raise DomainError(f"supported orders are 1..3, got {len(mu)}")
        object.__setattr__(self, "mu", mu)

    @property
    def order(self) -> int:
        return len(self.mu)


def _real_roots_basis(roots: list) -> list[EptFunction]:
    roots = sorted(roots, key=lambda r: (r != 0, -float(r)))
    out, seen = [], {}
    for r in roots:
        j = seen.get(r, 0)
        seen[r] = j + 1
        out.append(EptFunction.term(1, power=j, rate=r))
    return out


def basis_from_lode(spec: LinearOdeSpec, tol: float = 1e-10) -> list[EptFunction]:
    """Fundamental solutions of the ODE, one single-term EPT function each.

    Real roots come first (zero root first, then descending); a complex pair
    ``a +- ib`` contributes ``exp(ax) sin(bx)`` then ``exp(ax) cos(bx)``.
    """
    mu = spec.mu
    if spec.order == 1:
        return [EptFunction.term(1, rate=-mu[0])]
    if spec.order == 2:
        m0, m1 = mu
        disc = m1 * m1 - 4 * m0
        a = _key_number(-m1 / 2)
        if _is_zero(disc) or (isinstance(disc, float) and abs(disc) <= tol):
            return _real_roots_basis([a, a])
        if disc > 0:
            s = exact_sqrt(disc)
            return _real_roots_basis([_key_number((-m1 + s) / 2), _key_number((-m1 - s) / 2)])
        b = exact_sqrt(-disc) / 2
        return [
            EptFunction.term(1, rate=a, trig=SIN, omega=b),
            EptFunction.term(1, rate=a, trig=COS, omega=b),
        ]
    coeffs = [1.0] + [float(m) for m in reversed(mu)]
    raw = np.roots(coeffs)
    if not np.all(np.isfinite(raw)):
        raise DomainError("root finding failed")
    real, pairs = [], []
    for r in raw:
        if abs(r.imag) <= tol:
            real.append(r.real)
        elif r.imag > 0:
            pairs.append(r)
    # cluster repeated real roots within tol
    real.sort()
    clustered: list[float] = []
    for r in real:
        if clustered and abs(r - clustered[-1]) <= 1e-6:
            clustered.append(clustered[-1])
        else:
            clustered.append(r)
    out = _real_roots_basis([_key_number(r) for r in clustered])
    for z in pairs:
        a, b = _key_number(z.real), _key_number(z.imag)
        out += [EptFunction.term(1, rate=a, trig=SIN, omega=b), EptFunction.term(1, rate=a, trig=COS, omega=b)]
    return out


def apply_lode(spec: LinearOdeSpec, f: EptFunction) -> EptFunction:
    """``H[f] = D^n f + sum_i mu_i D^i f``."""
    out = f.diff(spec.order)
    d = f
    for m in spec.mu:
        if m != 0:
            out = out + d * m
        d = ept_diff(d)
    return out
