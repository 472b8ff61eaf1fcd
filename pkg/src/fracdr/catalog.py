"""Catalog of four-dimensional invariant product spaces and their operators.

Each entry maps free parameters (``mu..`` rates and unconstrained operator
coefficients) to a :class:`DROperatorSpec` and a :class:`SpacePair`. The
``printed`` constructor transcribes the published operator family literally.
Where the symbolic checker rejects it, ``corrected`` holds the repaired
family and ``discrepancies`` records what differs; the repair is reproduced
by :func:`derive_correction`, a minimal sparse search over coefficient slots.

Parameter names: ``a12``, ``b21`` are diffusion coefficients, ``g15`` is
gamma_15, ``gh11`` is gamma-hat_11 and ``mu20`` is mu_{2,0}.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from fracdr.errors import DomainError
from fracdr.subspace import SLOTS, DROperatorSpec, SpacePair, check_invariance, slot_functions
from fracdr.symalg import COS, SIN, EptFunction, LinearOdeSpec, basis_from_lode, ept_project, exact_sqrt

__all__ = [
    "CatalogCase",
    "Discrepancy",
    "Correction",
    "catalog",
    "get_case",
    "sample_params",
    "derive_correction",
    "COEFF_VALUES",
    "MU_VALUES",
]

COEFF_VALUES = tuple(Fraction(v) for v in (1, -1, 2, -2, Fraction(1, 2), Fraction(-1, 2)))
MU_VALUES = (Fraction(1, 4), Fraction(1), Fraction(4))

Builder = Callable[[Mapping[str, Fraction]], tuple[DROperatorSpec, SpacePair]]


@dataclass(frozen=True)
class Discrepancy:
    """A difference between the printed family and the machine-checked one."""

    case_id: str
    kind: str  # "operator", "space" or "notation"
    printed: str
    machine: str
    note: str = ""


@dataclass(frozen=True)
class CatalogCase:
    case_id: str
    family: str
    space_text: str
    params: tuple
    printed: Builder
    corrected: Builder | None = None
    discrepancies: tuple = ()
    # extra admissibility check on sampled parameters
    admissible: Callable[[Mapping[str, Fraction]], bool] | None = None
    # printed operator after parameter identifications and space repairs only;
    # derive_correction applied to it must reproduce the corrected slots
    machine_input: Builder | None = None

    @property
    def build(self) -> Builder:
        """The constructor expected to be invariant (corrected if needed)."""
        return self.corrected or self.printed

    @property
    def has_discrepancy(self) -> bool:
        return bool(self.discrepancies)

    def describe(self) -> str:
        lines = [f"case {self.case_id} ({self.family})", f"  space: {self.space_text}",
                 f"  free parameters: {', '.join(self.params)}"]
        p = {name: Fraction(1) for name in self.params}
        try:
            op, _ = self.build(p)
            lines.append("  operator slots (all free parameters = 1):")
            for k in (1, 2):
                nz = {s: v for s, v in op.slots(k).items() if v != 0}
                lines.append(f"    R_{k}: " + ", ".join(f"{s}={_fmt(v)}" for s, v in nz.items()))
        except (ZeroDivisionError, DomainError):
            pass
        if self.discrepancies:
            lines.append("  discrepancies:")
            for d in self.discrepancies:
                lines.append(f"    [{d.kind}] printed: {d.printed}")
                lines.append(f"    {' ' * (len(d.kind) + 2)} machine: {d.machine}")
                if d.note:
                    lines.append(f"    {' ' * (len(d.kind) + 2)} note:    {d.note}")
        else:
            lines.append("  discrepancies: none")
        return "\n".join(lines)


def _fmt(v) -> str:
    v = Fraction(v) if not isinstance(v, float) else v
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return repr(v)


# ---------------------------------------------------------------------------
# space helpers


def _e(rate) -> EptFunction:
    return EptFunction.term(1, rate=rate)


def _xe(rate) -> EptFunction:
    return EptFunction.term(1, power=1, rate=rate)


_ONE = EptFunction.const(1)
_X = EptFunction.term(1, power=1)


def _trig(mu0) -> tuple:
    w = exact_sqrt(mu0)
    return (EptFunction.term(1, trig=SIN, omega=w), EptFunction.term(1, trig=COS, omega=w))


def _roots_space(mu0, mu1) -> tuple:
    """``{exp(m1 x), exp(m2 x)}`` with m1, m2 the real roots of ``D^2 + mu1 D + mu0``."""
    disc = mu1 * mu1 - 4 * mu0
    if not disc > 0:
        raise DomainError("need two distinct real roots")
    s = exact_sqrt(disc)
    return (_e((-mu1 + s) / 2), _e((-mu1 - s) / 2))


def _space(b1, b2) -> SpacePair:
    return SpacePair(tuple(b1), tuple(b2))


def _op(r1: Mapping[str, object], r2: Mapping[str, object], tau=(1, 1)) -> DROperatorSpec:
    slots = {(1, s): v for s, v in r1.items()}
    slots.update({(2, s): v for s, v in r2.items()})
    return DROperatorSpec().with_slots(slots, tau=tau)


# ---------------------------------------------------------------------------
# printed families
#
# In every builder ``p`` maps parameter names to values. Terms absent from a
# printed operator are zero.


def _c11(p):
    m = p["mu21"]
    r1 = dict(a2=p["a12"], a1=p["a11"], a0=p["a10"], b1=p["b11"], b0=p["b10"],
              g5=-m**2 * p["b11"], g3=-2 * m**2 * p["a11"], g2=-m**2 * p["b10"],
              g1=p["g11"], g0=p["g10"], gh1=p["gh11"])
    # printed as -mu^2 (a22 u1 u2 + 2 b22 u2^2 + a20) u1, read with a20 u1 inside
    r2 = dict(a2=p["a22"], a0=p["a20"], b2=p["b22"], b1=p["b21"], b0=p["b20"],
              g5=-m**2 * p["a22"], g4=-2 * m**2 * p["b22"], g1=-m**2 * p["a20"],
              g2=p["g22"], g0=p["g20"], gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _e(m)), (_ONE, _e(-m)))


def _c12(p):
    m, a22, b21 = p["mu11"], p["a22"], p["b21"]
    s = a22 + b21
    r1 = dict(a2=p["a12"], a1=p["a11"], a0=p["a10"], b0=p["b10"], b1=-p["a12"] * a22 / s,
              g3=-2 * m**2 * p["a11"], g5=-m**2 * s**2 * p["b10"] / b21**2,
              g1=p["g11"], g0=p["g10"], g2=m**2 * s * p["a12"] * a22 / b21**2, gh1=p["gh11"])
    r2 = dict(g0=p["g20"], a2=a22, a0=p["a20"], b2=p["b22"], b1=b21, b0=p["b20"], g2=p["g22"],
              g5=-m**2 * a22, g1=-m**2 * p["a20"], g4=-2 * m**2 * s**2 * p["b22"] / b21**2,
              gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _e(-m)), (_ONE, _e(-m * s / b21)))


def _c13(p):
    m1, m2 = p["mu11"], p["mu21"]
    r1 = dict(a2=p["a12"], a1=p["a11"], a0=p["a10"], b0=p["b10"], b1=-p["a12"] * (m1 + m2) / m2,
              g1=p["g11"], g5=m2 * p["a12"] * (m2 + m1), g3=-2 * m1**2 * p["a11"],
              g2=-m2**2 * p["b10"], gh1=p["gh11"], g0=p["g10"])
    r2 = dict(a0=p["a20"], b2=p["b22"], b0=p["b20"], g2=p["g22"], g4=-2 * m2**2 * p["b22"],
              g1=-m1**2 * p["a20"], g0=p["g20"], gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _e(-m1)), (_ONE, _e(-m2)))


def _c14(p):
    m1, m2 = p["mu11"], p["mu21"]
    r1 = dict(a1=p["a11"], a2=-2 * p["b11"] / 3, a0=p["a10"], b0=p["b10"], b1=p["b11"],
              g1=p["g11"], g5=m2**2 * p["b11"], g3=-m2**2 * p["a11"] / 2, g2=-m2**2 * p["b10"],
              g0=p["g10"], gh1=p["gh11"])
    r2 = dict(a1=p["a21"], a2=-3 * p["b21"], a0=-4 * p["g21"] / m2**2, b2=p["b22"], b0=p["b20"],
              g2=p["g22"], g1=p["g21"], g0=p["g20"], g5=-m2**2 * 3 * p["b21"] / 4,
              g4=-2 * m2**2 * p["b22"], g3=-m2**2 * p["a21"] / 8, gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _e(-m1 / 2)), (_ONE, _e(-m2)))


def _c15(p):
    m = p["mu11"]
    r1 = dict(a2=p["a12"], a1=p["a11"], a0=p["a10"], b0=p["b10"], b1=-2 * p["a12"],
              g1=p["g11"], gh1=p["gh11"], g5=2 * m**2 * p["a12"], g3=-2 * m**2 * p["a11"],
              g2=-m**2 * p["b10"], g0=p["g10"])
    r2 = dict(a0=p["a20"], a2=-p["b21"], b1=p["b21"], b0=p["b20"], g2=p["g22"], gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _e(-m)), (_e(m), _e(-m)))


def _c16_ops(p):
    m = p["mu11"]
    r1 = dict(a1=p["a11"], a0=p["a10"], b0=p["b10"], g1=p["g11"], gh1=p["gh11"],
              g3=-2 * m**2 * p["a11"], g2=-m**2 * p["b10"] / 4, g0=p["g10"])
    # the u2 d/dx u1 coefficient is printed as b22
    r2 = dict(g2=p["g22"], a2=p["b22"], b1=p["b21"], b0=p["b20"],
              g5=-3 * m**2 * (2 * p["a22"] + p["b21"]) / 4, gh2=p["gh22"])
    return r1, r2


def _c16(p):
    m = p["mu11"]
    r1, r2 = _c16_ops(p)
    # the second space is printed with a repeated basis function
    return _op(r1, r2), _space((_ONE, _e(-m)), (_e(m / 2), _xe(m / 2)))


def _c17(p):
    m1 = p["mu11"]
    r1 = dict(a1=p["a11"], a0=p["a10"], g1=p["g11"], gh1=p["gh11"], g3=-2 * m1**2 * p["a11"],
              g0=p["g10"])
    r2 = dict(g2=p["g22"], b1=p["b21"], b0=p["b20"], a2=-p["b21"] * (m1 + p["mu21"]) / m1,
              g5=p["b21"] * (m1**2 + m1 * p["mu21"] + p["mu20"]), gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _e(-m1)), _roots_space(p["mu20"], p["mu21"]))


def _c18(p):
    m = p["mu11"]
    r1 = dict(a2=p["a12"], a1=p["a11"], a0=p["a10"], g1=p["g11"], gh1=p["gh11"],
              g3=-2 * m**2 * p["a11"], g0=p["g10"])
    r2 = dict(a2=p["b21"], b1=p["b21"], b0=p["b20"], g2=p["g22"], gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _e(-m)), (_e(m), _xe(m)))


def _c19(p):
    m, mc = p["mu21"], p["mu11"]
    rs = []
    for k in (1, 2):
        a = [p[f"a{k}{j}"] for j in range(3)]
        b = [p[f"b{k}{j}"] for j in range(3)]
        rs.append(dict(a0=a[0], a1=a[1], a2=a[2], b0=b[0], b1=b[1], b2=b[2],
                       g1=p[f"g{k}1"], g2=p[f"g{k}2"], g0=p[f"g{k}0"],
                       gh1=p[f"gh{k}1"], gh2=p[f"gh{k}2"],
                       g3=-2 * mc**2 * a[1], g4=-2 * mc**2 * b[2], g5=-2 * mc**2 * 2 * (a[2] + b[1])))
    return _op(*rs), _space((_ONE, _e(-m)), (_ONE, _e(-m)))


def _c21(p):
    m = p["mu11"]
    r1 = dict(a1=p["a11"], a0=p["a10"], b1=p["b11"], b0=p["b10"], g3=-2 * m**2 * p["a11"],
              g1=p["g11"], g0=p["g10"], gh1=p["gh11"])
    r2 = dict(a0=p["a20"], a2=-p["b21"], b2=p["b22"], b1=p["b21"], b0=p["b20"],
              g5=m**2 * p["b21"], g1=-m**2 * p["a20"], g2=p["g22"], g0=p["g20"], gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _e(m)), (_ONE, _X))


def _c22(p):
    m = p["mu21"]
    r1 = dict(g0=p["g10"], a2=p["a12"], a1=p["a11"], a0=p["a10"], b1=-p["a12"], b0=p["b10"],
              g3=m**2 * p["a12"], g2=-m**2 * p["b10"], g1=p["g11"], gh1=p["gh11"])
    r2 = dict(a0=p["a20"], a2=p["a22"], b2=p["b22"], b0=p["b20"], g4=-2 * m**2 * p["b22"],
              g2=p["g22"], g0=p["g20"], gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _X), (_ONE, _e(m)))


def _c23(p):
    r1 = dict(a1=p["a11"], a0=p["a10"], g1=p["g11"], g0=p["g10"], gh1=p["gh11"])
    r2 = dict(a0=p["a20"], a2=p["a22"], b0=p["b20"], g2=p["g22"], gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _X), _roots_space(p["mu20"], p["mu21"]))


def _c24(p):
    m = p["mu21"]
    r1 = dict(a1=p["a11"], a0=p["a10"], g1=p["g11"], gh1=p["gh11"], g0=p["g10"])
    r2 = dict(a0=p["a20"], a2=p["a22"], b0=p["b20"], b1=p["b21"], g5=-m**2 * p["b21"] / 4,
              g2=p["g22"], gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _X), (_e(-m / 2), _xe(-m / 2)))


def _c25(p):
    r1 = dict(a0=p["a10"], b0=p["b10"], b1=p["b11"], g1=p["g11"], gh1=p["gh11"])
    r2 = dict(b2=p["b22"], b0=p["b20"], g2=p["g22"], g0=p["g20"], gh2=p["gh22"])
    return _op(r1, r2), _space(_roots_space(p["mu10"], p["mu11"]), (_ONE, _X))


def _c31(p):
    m1, m20 = p["mu11"], p["mu20"]
    r1 = dict(a1=p["a11"], a0=p["a10"], b0=p["b10"], g3=-2 * m1**2 * p["a11"], g2=m20 * p["b10"],
              g1=p["g11"], gh1=p["gh11"], g0=p["g10"])
    r2 = dict(g2=p["g22"], b1=p["b21"], b0=p["b20"], a2=-p["b21"], g5=p["b21"] * (m1**2 + m20),
              gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _e(-m1)), _trig(m20))


def _c32(p):
    m10, m21 = p["mu10"], p["mu21"]
    # R1 is printed with gh22 on the delayed u2 and g22 on u2
    r1 = dict(gh2=p["gh22"], a0=p["a10"], a2=-p["b11"], b1=p["b11"], g2=p["g22"],
              g5=-p["b11"] * (m21**2 + m10))
    # R2 is printed with gh11 on the delayed u2
    r2 = dict(a1=p["a21"], a0=p["a20"], b2=p["b22"], b0=p["b20"], g2=p["g22"],
              g3=2 * m10 * p["a21"], g4=-2 * m21**2 * p["b22"], g1=m10 * p["a20"],
              gh2=p["gh11"], g0=p["g20"])
    return _op(r1, r2), _space(_trig(m10), (_ONE, _e(-m21)))


def _c41(p):
    m = p["mu20"]
    r1 = dict(a2=p["a12"], a1=p["a11"], a0=p["a10"], b2=p["b12"], b1=-p["a12"], b0=p["g12"] / m,
              g0=p["g10"], g5=-m * p["a12"], g4=2 * m * p["b12"], g2=p["g12"], g1=p["g11"],
              gh1=p["gh11"])
    r2 = dict(a2=p["a22"], a0=p["a20"], b1=p["b21"], b0=p["b20"], g5=m * p["b21"],
              g2=p["g22"], gh2=p["gh22"])
    return _op(r1, r2), _space((_ONE, _X), _trig(m))


def _c42(p):
    m = p["mu10"]
    r1 = dict(a2=p["a12"], a0=p["a10"], b1=p["b11"], b0=p["b10"], g5=m * p["a12"],
              g1=p["g11"], gh1=p["gh11"])
    # the u1 d/dx u2 coefficient of R2 is printed as b12 and the u2 term as g12
    r2 = dict(a1=p["a21"], a2=-p["b21"], a0=p["a20"], b2=p["b22"], b1=p["b12"], b0=p["b20"],
              g2=p["g12"], g0=p["g20"], g3=2 * m * p["a21"], g5=-m * p["b21"], g1=m * p["a20"],
              gh2=p["gh22"])
    return _op(r1, r2), _space(_trig(m), (_ONE, _X))


def _c5_printed(p):
    # both components are printed with a12, a11, a10 on d/dx u1
    rs = []
    for k in (1, 2):
        rs.append(dict(a2=p["a12"], a1=p["a11"], a0=p["a10"],
                       b2=p[f"b{k}2"], b1=p[f"b{k}1"], b0=p[f"b{k}0"],
                       g2=p[f"g{k}2"], g1=p[f"g{k}1"], g0=p[f"g{k}0"],
                       gh1=p[f"gh{k}1"], gh2=p[f"gh{k}2"]))
    return _op(*rs), _space((_ONE, _X), (_ONE, _X))


def _c5(p):
    rs = []
    for k in (1, 2):
        rs.append(dict(a2=p[f"a{k}2"], a1=p[f"a{k}1"], a0=p[f"a{k}0"],
                       b2=p[f"b{k}2"], b1=p[f"b{k}1"], b0=p[f"b{k}0"],
                       g2=p[f"g{k}2"], g1=p[f"g{k}1"], g0=p[f"g{k}0"],
                       gh1=p[f"gh{k}1"], gh2=p[f"gh{k}2"]))
    return _op(*rs), _space((_ONE, _X), (_ONE, _X))


# ---------------------------------------------------------------------------
# corrected families (see the discrepancy records attached to each case)


def _c12_restrict(p):
    return {**p, "a22": -2 * p["b21"]}


def _c12_fixed(p):
    p = _c12_restrict(p)
    m = p["mu11"]
    op, space = _c12(p)
    # the u2 and u1 u2 reaction coefficients are exchanged in print
    op = op.with_slots({(1, "g2"): -m**2 * p["b10"], (1, "g5"): 2 * m**2 * p["a12"]})
    return op, space


def _c14_restrict(p):
    return {**p, "mu11": p["mu21"]}


def _c14_fixed(p):
    p = _c14_restrict(p)
    m = p["mu21"]
    op, space = _c14(p)
    op = op.with_slots({(1, "g5"): -m**2 * p["b11"], (2, "b1"): p["b21"],
                        (2, "g5"): 3 * m**2 * p["b21"] / 4})
    return op, space


def _c16_space(p):
    r1, r2 = _c16_ops(p)
    m = p["mu11"]
    return _op(r1, r2), _space((_ONE, _e(-m)), (_e(m / 2), _e(-m / 2)))


def _c16_fixed(p):
    op, space = _c16_space(p)
    m = p["mu11"]
    return op.with_slots({(2, "g5"): -3 * m**2 * (2 * p["b22"] + p["b21"]) / 4}), space


def _c19_restrict(p):
    return {**p, "mu11": p["mu21"]}


def _c19_fixed(p):
    p = _c19_restrict(p)
    m = p["mu21"]
    op, space = _c19(p)
    return op.with_slots({(k, "g5"): -2 * m**2 * (p[f"a{k}2"] + p[f"b{k}1"]) for k in (1, 2)}), space


def _c22_fixed(p):
    m = p["mu21"]
    op, space = _c22(p)
    return op.with_slots({(1, "g3"): 0, (1, "g5"): m**2 * p["a12"]}), space


def _c32_fixed(p):
    op, space = _c32(p)
    # delayed and undelayed linear terms carried by their own component
    return op.with_slots({(1, "g2"): 0, (1, "gh2"): 0, (1, "g1"): p["g11"], (1, "gh1"): p["gh11"],
                          (2, "gh2"): p["gh22"]}), space


def _c42_fixed(p):
    op, space = _c42(p)
    return op.with_slots({(2, "b1"): p["b21"]}), space


# ---------------------------------------------------------------------------
# discrepancy records


def _d(case_id, kind, printed, machine, note=""):
    return Discrepancy(case_id, kind, printed, machine, note)


_D12 = (
    _d("1.2", "space",
       "Y2 = L{1, exp(-mu11 (a22 + b21) x / b21)} for any a22, b21",
       "a22 = -2 b21, so Y2 = L{1, exp(mu11 x)}",
       "otherwise exp(-(mu11 + rate2) x) terms survive in both components whenever a12 or a22 is nonzero"),
    _d("1.2", "operator",
       "-mu11^2 (a22 + b21)^2 b10 / b21^2 u1 u2 + mu11^2 (a22 + b21) a12 a22 / b21^2 u2",
       "gamma_15 = 2 mu11^2 a12, gamma_12 = -mu11^2 b10",
       "the u2 and u1 u2 reaction coefficients are exchanged"),
)
_D14 = (
    _d("1.4", "space", "Y1 = L{1, exp(-mu11 x / 2)}", "Y1 = L{1, exp(-mu21 x / 2)}",
       "the printed coefficients only close when mu11 = mu21"),
    _d("1.4", "operator", "+mu21^2 b11 u1 u2 in R1", "gamma_15 = -mu21^2 b11"),
    _d("1.4", "operator", "R2 has no b21 u1 d/dx u2 term and -3 mu21^2 b21 / 4 u1 u2",
       "b_21 = b21 and gamma_25 = +3 mu21^2 b21 / 4"),
)
_D16 = (
    _d("1.6", "space", "Y2 = L{exp(mu11 x / 2), exp(mu11 x / 2)} (repeated)",
       "Y2 = L{exp(mu11 x / 2), exp(-mu11 x / 2)}",
       "the b10 u2_xx - mu11^2 b10 u2 / 4 pairing requires rates +-mu11/2"),
    _d("1.6", "operator", "(b22 u2) d/dx u1 in R2 alongside -3 mu11^2 (2 a22 + b21) / 4 u1 u2",
       "gamma_25 = -3 mu11^2 (2 b22 + b21) / 4",
       "the reaction coefficient must use the same constant as u2 d/dx u1; "
       "renaming that diffusion coefficient a22 is the equivalent one-slot repair"),
)
_D19 = (
    _d("1.9", "space", "-2 mu11^2 [...] with Y = L{1, exp(-mu21 x)} x L{1, exp(-mu21 x)}",
       "mu11 = mu21"),
    _d("1.9", "operator", "-4 mu^2 (a_k2 + b_k1) u1 u2", "gamma_k5 = -2 mu21^2 (a_k2 + b_k1)"),
)
_D22 = (
    _d("2.2", "operator", "+mu21^2 a12 u1^2 in R1", "gamma_15 = mu21^2 a12, gamma_13 = 0",
       "the term is a12 u1 u2; gamma_12 = -mu21^2 b10 is forced and agrees with print"),
)
_D32 = (
    _d("3.2", "operator", "R1 contains gamma22 u2 and gamma-hat22 delayed u2",
       "gamma_12 = 0 and gamma-hat_12 = 0",
       "u2 terms cannot lie in the trigonometric Y1; read as gamma11 u1 + gamma-hat11 delayed u1"),
    _d("3.2", "notation", "R2 contains gamma-hat11 delayed u2", "gamma-hat_22 delayed u2",
       "coefficient name only; invariance is unaffected"),
)
_D42 = (
    _d("4.2", "operator", "(b22 u2 + b12 u1 + b20) d/dx u2 in R2 with free b12",
       "b_21 = b21", "the same b21 fixes a_22 = -b21 and gamma_25 = -mu10 b21"),
)
_D5 = (
    _d("5", "notation", "R_k uses a12, a11, a10 for both k", "a_k2, a_k1, a_k0",
       "both readings are invariant; the corrected family lets the two components differ"),
)


def _names(text: str) -> tuple:
    return tuple(text.split())


def _per_k(fmt: Sequence[str]) -> tuple:
    return tuple(f.format(k=k) for k in (1, 2) for f in fmt)


_CASES: list[CatalogCase] = [
    CatalogCase("1.1", "exponential", "L{1, exp(mu21 x)} x L{1, exp(-mu21 x)}",
                _names("mu21 a12 a11 a10 b11 b10 g11 g10 gh11 a22 a20 b22 b21 b20 g22 g20 gh22"), _c11),
    CatalogCase("1.2", "exponential", "L{1, exp(-mu11 x)} x L{1, exp(-mu11 (a22 + b21) x / b21)}",
                _names("mu11 a12 a11 a10 b10 g11 g10 gh11 a22 a20 b22 b21 b20 g22 g20 gh22"), _c12,
                corrected=_c12_fixed, machine_input=lambda p: _c12(_c12_restrict(p)),
                admissible=lambda p: p["a22"] + p["b21"] != 0, discrepancies=_D12),
    CatalogCase("1.3", "exponential", "L{1, exp(-mu11 x)} x L{1, exp(-mu21 x)}",
                _names("mu11 mu21 a12 a11 a10 b10 g11 g10 gh11 a20 b22 b20 g22 g20 gh22"), _c13),
    CatalogCase("1.4", "exponential", "L{1, exp(-mu11 x / 2)} x L{1, exp(-mu21 x)}",
                _names("mu11 mu21 a11 a10 b11 b10 g11 g10 gh11 a21 b22 b21 b20 g22 g21 g20 gh22"), _c14,
                corrected=_c14_fixed, machine_input=lambda p: _c14(_c14_restrict(p)), discrepancies=_D14),
    CatalogCase("1.5", "exponential", "L{1, exp(-mu11 x)} x L{exp(mu11 x), exp(-mu11 x)}",
                _names("mu11 a12 a11 a10 b10 g11 g10 gh11 a20 b21 b20 g22 gh22"), _c15),
    CatalogCase("1.6", "exponential", "L{1, exp(-mu11 x)} x L{exp(mu11 x / 2), exp(mu11 x / 2)}",
                _names("mu11 a11 a10 b10 g11 g10 gh11 a22 b22 b21 b20 g22 gh22"), _c16,
                corrected=_c16_fixed, machine_input=_c16_space, discrepancies=_D16),
    CatalogCase("1.7", "exponential", "L{1, exp(-mu11 x)} x L{exp(m1 x), exp(m2 x)}, "
                "m1, m2 roots of m^2 + mu21 m + mu20",
                _names("mu11 mu20 mu21 a11 a10 g11 g10 gh11 b21 b20 g22 gh22"), _c17,
                admissible=lambda p: p["mu21"] ** 2 - 4 * p["mu20"] > 0),
    CatalogCase("1.8", "exponential", "L{1, exp(-mu11 x)} x L{exp(mu11 x), x exp(mu11 x)}",
                _names("mu11 a12 a11 a10 g11 g10 gh11 b21 b20 g22 gh22"), _c18),
    CatalogCase("1.9", "exponential", "L{1, exp(-mu21 x)} x L{1, exp(-mu21 x)}",
                ("mu11", "mu21") + _per_k(["a{k}2", "a{k}1", "a{k}0", "b{k}2", "b{k}1", "b{k}0",
                                           "g{k}2", "g{k}1", "g{k}0", "gh{k}1", "gh{k}2"]), _c19,
                corrected=_c19_fixed, machine_input=lambda p: _c19(_c19_restrict(p)), discrepancies=_D19),
    CatalogCase("2.1", "exponential-polynomial", "L{1, exp(mu11 x)} x L{1, x}",
                _names("mu11 a11 a10 b11 b10 g11 g10 gh11 a20 b22 b21 b20 g22 g20 gh22"), _c21),
    CatalogCase("2.2", "exponential-polynomial", "L{1, x} x L{1, exp(mu21 x)}",
                _names("mu21 a12 a11 a10 b10 g11 g10 gh11 a20 a22 b22 b20 g22 g20 gh22"), _c22,
                corrected=_c22_fixed, machine_input=_c22, discrepancies=_D22),
    CatalogCase("2.3", "exponential-polynomial", "L{1, x} x L{exp(m1 x), exp(m2 x)}, "
                "m1, m2 roots of m^2 + mu21 m + mu20",
                _names("mu20 mu21 a11 a10 g11 g10 gh11 a20 a22 b20 g22 gh22"), _c23,
                admissible=lambda p: p["mu21"] ** 2 - 4 * p["mu20"] > 0),
    CatalogCase("2.4", "exponential-polynomial", "L{1, x} x L{exp(-mu21 x / 2), x exp(-mu21 x / 2)}",
                _names("mu21 a11 a10 g11 g10 gh11 a20 a22 b20 b21 g22 gh22"), _c24),
    CatalogCase("2.5", "exponential-polynomial", "L{exp(m1 x), exp(m2 x)} x L{1, x}, "
                "m1, m2 roots of m^2 + mu11 m + mu10",
                _names("mu10 mu11 a10 b10 b11 g11 gh11 b22 b20 g22 g20 gh22"), _c25,
                admissible=lambda p: p["mu11"] ** 2 - 4 * p["mu10"] > 0),
    CatalogCase("3.1", "exponential-trigonometric",
                "L{1, exp(-mu11 x)} x L{sin(sqrt(mu20) x), cos(sqrt(mu20) x)}",
                _names("mu11 mu20 a11 a10 b10 g11 g10 gh11 b21 b20 g22 gh22"), _c31),
    CatalogCase("3.2", "exponential-trigonometric",
                "L{sin(sqrt(mu10) x), cos(sqrt(mu10) x)} x L{1, exp(-mu21 x)}",
                _names("mu10 mu21 a10 b11 g22 gh22 a21 a20 b22 b20 g20 gh11 g11"), _c32,
                corrected=_c32_fixed, machine_input=_c32, discrepancies=_D32),
    CatalogCase("4.1", "polynomial-trigonometric", "L{1, x} x L{sin(sqrt(mu20) x), cos(sqrt(mu20) x)}",
                _names("mu20 a12 a11 a10 b12 g12 g11 g10 gh11 a22 a20 b21 b20 g22 gh22"), _c41),
    CatalogCase("4.2", "polynomial-trigonometric", "L{sin(sqrt(mu10) x), cos(sqrt(mu10) x)} x L{1, x}",
                _names("mu10 a12 a10 b11 b10 g11 gh11 a21 a20 b21 b22 b12 b20 g12 g20 gh22"), _c42,
                corrected=_c42_fixed, machine_input=_c42, discrepancies=_D42),
    CatalogCase("5", "polynomial", "L{1, x} x L{1, x}",
                _names("a12 a11 a10") + _per_k(["b{k}2", "b{k}1", "b{k}0", "g{k}2", "g{k}1",
                                                 "g{k}0", "gh{k}1", "gh{k}2"]) + ("a22", "a21", "a20"),
                _c5_printed,
                corrected=_c5, discrepancies=_D5),
]


def catalog() -> list[CatalogCase]:
    """All catalog entries in publication order."""
    return list(_CASES)


def get_case(case_id: str) -> CatalogCase:
    for c in _CASES:
        if c.case_id == case_id:
            return c
    raise KeyError(f"unknown catalog case {case_id!r}")


def sample_params(case: CatalogCase, rng: random.Random, tries: int = 200) -> dict[str, Fraction]:
    """Random admissible parameters: rates from MU_VALUES, the rest from COEFF_VALUES."""
    for _ in range(tries):
        p = {n: rng.choice(MU_VALUES if n.startswith("mu") else COEFF_VALUES) for n in case.params}
        if case.admissible is not None and not case.admissible(p):
            continue
        try:
            case.printed(p)
            if case.corrected is not None:
                case.corrected(p)
        except (ZeroDivisionError, DomainError):
            continue
        return p
    raise DomainError(f"no admissible parameters found for case {case.case_id}")


# ---------------------------------------------------------------------------
# minimal sparse correction


@dataclass(frozen=True)
class Correction:
    """Slot changes ``{(k, slot): (old, new)}`` that make an operator invariant."""

    changes: dict
    alternatives: tuple = field(default=())

    def apply(self, op: DROperatorSpec) -> DROperatorSpec:
        return op.with_slots({ks: new for ks, (_, new) in self.changes.items()})

    def describe(self) -> str:
        if not self.changes:
            return "no change"
        return ", ".join(f"{s[:-1]}{k}{s[-1]}: {_fmt(o)} -> {_fmt(n)}"
                         for (k, s), (o, n) in sorted(self.changes.items()))


def _remainder_matrix(space: SpacePair, k: int, phis) -> tuple[list, np.ndarray]:
    """Columns: remainder coefficients of each slot function outside ``Y_k``."""
    basis = list(space.basis(k))
    rems = {s: ept_project(phis[s], basis)[1] for s in SLOTS}
    rows = sorted({(key, mono) for r in rems.values() for key, c in r for mono in c.terms},
                  key=lambda km: (str(km[0]), km[1]))
    index = {r: i for i, r in enumerate(rows)}
    mat = np.zeros((len(rows), len(SLOTS)))
    for j, s in enumerate(SLOTS):
        for key, c in rems[s]:
            for mono, v in c.terms.items():
                mat[index[(key, mono)], j] = float(v)
    return rows, mat


def derive_correction(op: DROperatorSpec, space: SpacePair, max_changes: int = 3,
                      tol: float = 1e-9) -> Correction | None:
    """Smallest set of slot changes (per component) making ``op`` invariant on ``space``.

    Invariance is linear in the coefficients, so for each component the
    remainder is ``M c``; subsets of at most ``max_changes`` slots are tried in
    increasing size and the least-squares update that zeroes ``M c`` is kept.
    New values are rationalised when they are within ``tol`` of a small fraction.
    Returns ``None`` when no correction of that size exists.
    """
    phis = slot_functions(space)
    changes: dict = {}
    alternatives: list = []
    for k in (1, 2):
        _, mat = _remainder_matrix(space, k, phis)
        c = np.array([float(op.slot(k, s)) for s in SLOTS])
        resid = mat @ c if mat.size else np.zeros(0)
        scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 1.0)
        if resid.size == 0 or np.max(np.abs(resid)) <= tol * scale:
            continue
        found = None
        for size in range(1, max_changes + 1):
            hits = []
            for subset in itertools.combinations(range(len(SLOTS)), size):
                sub = mat[:, subset]
                d, *_ = np.linalg.lstsq(sub, -resid, rcond=None)
                if np.max(np.abs(sub @ d + resid)) <= tol * scale * max(1.0, np.max(np.abs(c))):
                    if np.all(np.abs(d) > tol):
                        hits.append((subset, d))
            if hits:
                # prefer reaction-coefficient repairs, then repairs that keep
                # printed terms alive
                hits.sort(key=lambda h: (
                    sum(SLOTS[j][0] in "ab" for j in h[0]),
                    sum(c[j] != 0 and abs(c[j] + dj) <= tol for j, dj in zip(*h)),
                ))
                found = hits
                break
        if found is None:
            return None
        subset, d = found[0]
        for j, dj in zip(subset, d):
            s = SLOTS[j]
            old = op.slot(k, s)
            new = float(old) + dj
            frac = Fraction(new).limit_denominator(10**4)
            changes[(k, s)] = (old, frac if abs(float(frac) - new) <= 1e-9 else new)
        alternatives.extend(
            tuple((k, SLOTS[j]) for j in sub) for sub, _ in found[1:]
        )
    return Correction(changes, tuple(alternatives))
