import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdr.errors import AmbiguousBasisError, DomainError
from fracdr.symalg import (
    COS,
    NONE,
    SIN,
    DeltaPoly,
    EptFunction,
    LinearOdeSpec,
    apply_lode,
    basis_from_lode,
    delta,
    delta_hat,
    ept_diff,
    ept_mul,
    ept_project,
)

T = EptFunction.term


# ----------------------------------------------------------------- DeltaPoly

def test_delta_poly_arithmetic():
    p = delta(1, 1) * 2 + delta(1, 2) * delta(2, 1) - 3
    assert p.degree() == 2
    assert p.coefficient(()) == -3
    assert (p - p).is_zero()
    assert p * 0 == DeltaPoly()


def test_delta_poly_evaluate():
    p = delta(1, 1) * delta(1, 1) + delta_hat(2, 1) * Fraction(1, 2)
    v = p.evaluate({(0, 1, 1): 3.0, (1, 2, 1): 4.0})
    assert v == 11.0


def test_split_delayed():
    p = delta(1, 1) * 2 + delta_hat(1, 1) * 5 + delta_hat(2, 2)
    free, delayed = p.split_delayed()
    assert free == delta(1, 1) * 2
    assert delayed == {(1, 1, 1): 5, (1, 2, 2): 1}


# ----------------------------------------------------------------- products

def test_x_times_exponential():
    assert ept_mul(T(1, power=1), T(1, rate=2)) == T(1, power=1, rate=2)


def test_sine_squared():
    w = Fraction(3, 2)
    got = ept_mul(T(1, trig=SIN, omega=w), T(1, trig=SIN, omega=w))
    assert got == EptFunction.const(Fraction(1, 2)) - T(Fraction(1, 2), trig=COS, omega=2 * w)


def test_rates_cancel():
    f = T(1, rate=1) * delta(1, 1)
    g = T(1, rate=-1) * delta(2, 1)
    assert ept_mul(f, g) == EptFunction.const(1) * (delta(1, 1) * delta(2, 1))


def test_negative_frequency_folded():
    assert T(1, trig=SIN, omega=-2) == T(-1, trig=SIN, omega=2)
    assert T(1, trig=COS, omega=-2) == T(1, trig=COS, omega=2)
    assert T(1, trig=COS, omega=0) == EptFunction.const(1)
    assert T(1, trig=SIN, omega=0).is_zero()


def test_irrational_rates_merge():
    r = math.sqrt(2)
    a = T(1, rate=r) * T(1, rate=r)
    b = T(1, rate=2 * r)
    assert a == b


# ----------------------------------------------------------------- derivatives

def test_diff_x_exponential():
    lam = Fraction(3)
    assert ept_diff(T(1, power=1, rate=lam)) == T(1, rate=lam) + T(lam, power=1, rate=lam)


def test_diff_sine():
    w = math.sqrt(2.0)
    assert ept_diff(T(1, trig=SIN, omega=w)).close_to(T(w, trig=COS, omega=w))


def test_diff_constant():
    assert ept_diff(EptFunction.const(7)).is_zero()
    assert len(ept_diff(EptFunction.const(7))) == 0


def test_evaluate_numerically():
    f = T(2, power=1, rate=Fraction(1, 2), trig=COS, omega=3)
    x = np.linspace(-1, 1, 7)
    assert np.allclose(f.evaluate(x), 2 * x * np.exp(x / 2) * np.cos(3 * x))


# ----------------------------------------------------------------- projection

def test_project_affine():
    f = EptFunction.const(3) + T(5, power=1)
    coords, rem = ept_project(f, [T(1), T(1, power=1)])
    assert coords == [DeltaPoly.const(3), DeltaPoly.const(5)]
    assert rem.is_zero()


def test_project_square_leaves_remainder():
    coords, rem = ept_project(T(1, power=2), [T(1), T(1, power=1)])
    assert all(c.is_zero() for c in coords)
    assert rem == T(1, power=2)


def test_project_rate_mismatch():
    lam = Fraction(2)
    d = delta(1, 1)
    f = T(1, rate=2 * lam) * (d * d) + T(1, rate=lam) * d
    coords, rem = ept_project(f, [T(1, rate=lam)])
    assert coords == [d]
    assert rem == T(1, rate=2 * lam) * (d * d)


def test_project_ambiguous_basis():
    with pytest.raises(AmbiguousBasisError):
        ept_project(T(1), [T(1), T(2)])


# ----------------------------------------------------------------- linear ODE bases

def test_double_zero_root():
    assert basis_from_lode(LinearOdeSpec((0, 0))) == [T(1), T(1, power=1)]


def test_trigonometric_basis():
    b = basis_from_lode(LinearOdeSpec((4, 0)))
    assert b == [T(1, trig=SIN, omega=2), T(1, trig=COS, omega=2)]


def test_repeated_root():
    mu = Fraction(3, 2)
    b = basis_from_lode(LinearOdeSpec((mu * mu, -2 * mu)))
    assert b == [T(1, rate=mu), T(1, power=1, rate=mu)]


def test_order_three_basis_annihilated():
    spec = LinearOdeSpec((-6, 11, -6))  # roots 1, 2, 3
    b = basis_from_lode(spec)
    assert len(b) == 3
    for psi in b:
        assert apply_lode(spec, psi).close_to(EptFunction(), tol=1e-9)


def test_order_validation():
    with pytest.raises(DomainError):
        LinearOdeSpec(())
    with pytest.raises(DomainError):
        LinearOdeSpec((1, 2, 3, 4))


@pytest.mark.parametrize("mu", [(0, 0), (1, 0), (Fraction(1, 4), 0), (-4, 0), (2, -3), (1, 2), (5, 2), (-1, 0)])
def test_basis_annihilated_by_its_ode(mu):
    spec = LinearOdeSpec(mu)
    for psi in basis_from_lode(spec):
        assert apply_lode(spec, psi).close_to(EptFunction(), tol=1e-10)


# ----------------------------------------------------------------- algebraic properties

small = st.sampled_from([Fraction(v) for v in (-2, -1, Fraction(-1, 2), Fraction(1, 2), 1, 2, 3)])


@st.composite
def ept(draw):
    out = EptFunction()
    for _ in range(draw(st.integers(1, 3))):
        trig = draw(st.sampled_from([NONE, COS, SIN]))
        out = out + T(draw(small), power=draw(st.integers(0, 2)), rate=draw(st.sampled_from([0, 1, -1, 2])),
                      trig=trig, omega=draw(st.sampled_from([1, 2, Fraction(1, 2)])) if trig != NONE else 0)
    return out


@settings(max_examples=60, deadline=None)
@given(ept(), ept(), ept())
def test_ring_axioms(f, g, h):
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h


@settings(max_examples=60, deadline=None)
@given(ept(), ept())
def test_leibniz(f, g):
    assert ept_diff(f * g) == ept_diff(f) * g + f * ept_diff(g)


@settings(max_examples=60, deadline=None)
@given(ept())
def test_projection_round_trip(f):
    basis = [T(1), T(1, power=1), T(1, rate=1), T(1, trig=SIN, omega=1)]
    coords, rem = ept_project(f, basis)
    rebuilt = rem
    for c, b in zip(coords, basis):
        rebuilt = rebuilt + b * c
    assert rebuilt == f


@settings(max_examples=40, deadline=None)
@given(ept(), st.floats(-1, 1))
def test_product_matches_pointwise(f, x):
    g = f * f
    assert g.evaluate(np.array([x]))[0] == pytest.approx(f.evaluate(np.array([x]))[0] ** 2, rel=1e-9, abs=1e-9)
