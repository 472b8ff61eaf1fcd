import math

import numpy as np
import pytest
from scipy.special import gammainc

from fracdr.errors import DomainError
from fracdr.fracops import (
    FracKind,
    FracOrder,
    SampledTrajectory,
    caputo_derivative,
    fractional_derivative,
    rl_derivative,
    rl_integral,
    second_difference,
)


def sample(f, n, t_end=1.0):
    return SampledTrajectory.from_function(f, t_end, n)


def order_of(errors):
    e = np.abs(np.asarray(errors))
    return np.log2(e[:-1] / e[1:])


# ----------------------------------------------------------------- types

def test_order_fields():
    assert FracOrder(0.5).n == 1
    assert FracOrder(1.0).n == 1
    assert FracOrder(1.2, "rl").n == 2
    assert FracOrder(0.5, "Riemann-Liouville").kind is FracKind.RL


@pytest.mark.parametrize("alpha", [0.0, -0.1, 2.5])
def test_order_domain(alpha):
    with pytest.raises(DomainError):
        FracOrder(alpha)


def test_trajectory_validation():
    with pytest.raises(DomainError):
        SampledTrajectory(0.0, 0.1, [1.0, 2.0])
    with pytest.raises(DomainError):
        SampledTrajectory(0.0, 0.0, [1.0, 2.0, 3.0])
    tr = sample(lambda t: t, 4)
    assert tr.at(0.5) == 0.5
    with pytest.raises(DomainError):
        tr.at(0.3)


def test_operators_need_origin():
    tr = SampledTrajectory(0.5, 0.1, np.ones(10))
    with pytest.raises(DomainError):
        rl_integral(tr, 0.5)


@pytest.mark.parametrize("mu", [0.0, 2.0, -1.0])
def test_integral_order_domain(mu):
    with pytest.raises(DomainError):
        rl_integral(sample(np.ones_like, 8), mu)


# ----------------------------------------------------------------- integral

def test_integral_of_one():
    out = rl_integral(sample(np.ones_like, 64), 0.5)
    assert out.values[-1] == pytest.approx(1.1283791670955126, rel=1e-13)


def test_integral_of_linear_is_exact():
    tr = sample(lambda t: t, 32)
    out = rl_integral(tr, 1.0)
    assert np.allclose(out.values, tr.times**2 / 2, atol=1e-15)


def test_integral_of_power_with_singular_split():
    out = rl_integral(sample(lambda t: t**0.3, 256), 0.7, singular_exponent=0.3)
    assert out.values[-1] == pytest.approx(0.8974706963062772, rel=1e-12)


def test_integral_second_order():
    errs = []
    for n in (32, 64, 128, 256):
        out = rl_integral(sample(np.exp, n), 0.4)
        # I^0.4 e^t at t = 1 equals e * P(0.4, 1) (regularised lower gamma)
        errs.append(out.values[-1] - math.e * gammainc(0.4, 1.0))
    assert np.all(order_of(errs) > 1.8)


def test_semigroup_on_square():
    errs = []
    for n in (64, 128, 256):
        tr = sample(lambda t: t**2, n)
        two = rl_integral(rl_integral(tr, 0.3), 0.5).values
        one = rl_integral(tr, 0.8).values
        errs.append(np.max(np.abs(two - one)))
    assert errs[-1] < 1e-4
    assert np.all(order_of(errs) > 1.5)


# ----------------------------------------------------------------- Caputo

@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.5, 2.0])
def test_caputo_of_constant(alpha):
    out = caputo_derivative(sample(lambda t: np.full_like(t, 3.5), 64), FracOrder(alpha))
    assert np.max(np.abs(out.values)) < 1e-11


def test_caputo_of_linear():
    out = caputo_derivative(sample(lambda t: t, 64), FracOrder(0.5))
    assert out.values[-1] == pytest.approx(1.1283791670955126, rel=1e-13)


def test_caputo_of_square_above_one():
    out = caputo_derivative(sample(lambda t: t**2, 64), FracOrder(1.5))
    assert out.values[-1] == pytest.approx(2.2567583341910251, rel=1e-12)


def test_caputo_cubic_order_at_half():
    errs = []
    exact = math.gamma(4) / math.gamma(3.5)
    for n in (64, 128, 256):
        errs.append(caputo_derivative(sample(lambda t: t**3, n), FracOrder(0.5)).values[-1] - exact)
    assert np.all(order_of(errs) >= 1.4)


def test_caputo_needs_samples():
    with pytest.raises(DomainError):
        caputo_derivative(SampledTrajectory(0.0, 0.1, [0.0, 1.0, 2.0]), FracOrder(1.5))


# ----------------------------------------------------------------- RL

def test_rl_of_constant():
    out = rl_derivative(sample(lambda t: np.full_like(t, 2.0), 256), FracOrder(0.5, "rl"))
    assert out.values[-1] == pytest.approx(2 * 0.5641895835477563, rel=1e-5)


@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
def test_rl_annihilates_kernel_power(alpha):
    tr = sample(lambda t: t ** (alpha - 1), 128)
    out = rl_derivative(tr, FracOrder(alpha, "rl"), singular_exponent=alpha - 1)
    assert np.max(np.abs(out.values[1:])) < 1e-10


def test_rl_of_linear():
    # Gamma(2) / Gamma(1.7)
    out = rl_derivative(sample(lambda t: t, 256), FracOrder(0.3, "rl"))
    assert out.values[-1] == pytest.approx(1.1005474055236657, rel=1e-5)


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_caputo_and_rl_agree_for_vanishing_start(alpha):
    tr = sample(lambda t: t**2, 256)
    c = caputo_derivative(tr, FracOrder(alpha)).values
    r = rl_derivative(tr, FracOrder(alpha, "rl")).values
    assert np.max(np.abs(c[4:] - r[4:])) < 1e-3


def test_dispatch():
    tr = sample(lambda t: t**2, 64)
    assert np.array_equal(fractional_derivative(tr, FracOrder(0.5)).values,
                          caputo_derivative(tr, FracOrder(0.5)).values)
    assert np.array_equal(fractional_derivative(tr, FracOrder(0.5, "rl")).values,
                          rl_derivative(tr, FracOrder(0.5, "rl")).values)


def test_second_difference_exact_on_cubic():
    h = 0.1
    t = h * np.arange(12)
    assert np.allclose(second_difference(t**3, h), 6 * t, atol=1e-10)


# ----------------------------------------------------------------- power rule suite

def power_rule_exact(kind, p, alpha):
    if kind == "caputo" and p < FracOrder(alpha).n:
        return 0.0  # the n-th derivative vanishes
    return math.gamma(p + 1) / math.gamma(p + 1 - alpha)


def power_rule_errors(kind, p, alpha, ns=(64, 128, 256)):
    exact = power_rule_exact(kind, p, alpha)
    out = []
    for n in ns:
        tr = sample(lambda t: t**p, n)
        d = fractional_derivative(tr, FracOrder(alpha, kind)).values[-1]
        out.append(d - exact)
    return out


def expected_order(kind, p, alpha):
    """Theoretical order on t**p; inf where the scheme is exact."""
    if kind == "caputo":
        if alpha > 1 or p == 1:
            return math.inf  # differences exact on cubics, trapezoid exact on lines
        return 2 - alpha  # L1 scheme
    return 2.0  # product trapezoid plus second-order differences


@pytest.mark.parametrize("kind", ["caputo", "rl"])
@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9, 1.5])
def test_power_rule(kind, p, alpha):
    errs = power_rule_errors(kind, p, alpha)
    theory = expected_order(kind, p, alpha)
    if math.isinf(theory):
        assert max(abs(e) for e in errs) < 1e-12
    else:
        assert np.all(np.abs(order_of(errs) - theory) <= 0.3)
