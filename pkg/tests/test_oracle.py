import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdr.closedform import Example1Params, solve_example1
from fracdr.data import HistorySpec, InitialData
from fracdr.errors import DomainError
from fracdr.fracops import FracOrder, SampledTrajectory
from fracdr.mlf import ml
from fracdr.oracle import FddeProblem, apply_operator, compare, pde_residual, solve_classical, solve_fdde
from fracdr.subspace import DelayTerm, DROperatorSpec, ReducedSystem, SpacePair
from fracdr.symalg import DeltaPoly, delta


def scalar_system(lam=DeltaPoly(), delays=()):
    """One live coordinate delta11; delta21 is identically zero."""
    return ReducedSystem((1, 1), {(1, 1): lam, (2, 1): DeltaPoly()}, {(1, 1): tuple(delays), (2, 1): ()}, (1, 1))


RELAX = scalar_system(delta(1, 1) * -1)
UNIT_DELAY = scalar_system(delays=[DelayTerm(1, 1, 1, 1)])


# ----------------------------------------------------------------- integrators

def test_relaxation_value():
    tr = solve_fdde(FddeProblem(RELAX, (0.5, 0.5), InitialData({"11": 1.0}), T=1.0, h=1 / 512))
    # E_{1/2}(-1) = e erfc(1)
    assert tr[(1, 1)].values[-1] == pytest.approx(0.4275835761558070, abs=5e-6)


@pytest.mark.parametrize("solver,tol", [(solve_classical, 1e-12), (solve_fdde, 1e-6)])
def test_unit_delay_with_constant_history(solver, tol):
    # pieces 1 + t, 2 + s + s^2 / 2, then 3.5 + 2 s + s^2 / 2 + s^3 / 6 at s = 0.5
    p = FddeProblem(UNIT_DELAY, (1, 1), InitialData({"11": 1.0}), HistorySpec({"11": 1.0}), T=2.5, h=1 / 512)
    assert solver(p)[(1, 1)].values[-1] == pytest.approx(4.6458333333333333, abs=tol)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0])
def test_zero_rhs_keeps_taylor_data(alpha):
    p = FddeProblem(scalar_system(), (alpha, alpha), InitialData({"11": 0.7}, {"11": -0.3}), T=2.0, h=1 / 64)
    tr = solve_fdde(p)[(1, 1)]
    want = 0.7 + (-0.3 * tr.times if alpha > 1 else 0.0)
    assert np.allclose(tr.values, want, atol=1e-13)


@pytest.mark.parametrize("alpha", [0.5, 0.9])
def test_abm_convergence_order(alpha):
    errs = []
    for n in (64, 128, 256):
        tr = solve_fdde(FddeProblem(RELAX, (alpha, alpha), InitialData({"11": 1.0}), T=1.0, h=1 / n))
        errs.append(abs(tr[(1, 1)].values[-1] - ml(alpha, 1, 1, -1.0)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1 + alpha - 0.2)


def test_second_order_classical_is_cosine():
    # delta'' = -delta, delta(0) = 1, delta'(0) = 0
    p = FddeProblem(RELAX, (2, 2), InitialData({"11": 1.0}), T=3.0, h=1 / 256)
    tr = solve_classical(p)[(1, 1)]
    assert np.max(np.abs(tr.values - np.cos(tr.times))) < 1e-9


def test_classical_needs_integer_orders():
    with pytest.raises(DomainError):
        solve_classical(FddeProblem(RELAX, (0.5, 0.5), InitialData(), T=1.0, h=0.125))


def test_abm_refuses_rl():
    p = FddeProblem(RELAX, (FracOrder(0.5, "rl"), FracOrder(0.5, "rl")), InitialData(), T=1.0, h=0.125)
    with pytest.raises(DomainError):
        solve_fdde(p)


def test_grid_must_align_with_delay():
    with pytest.raises(DomainError):
        FddeProblem(UNIT_DELAY, (1, 1), InitialData(), T=1.0, h=0.3)
    with pytest.raises(DomainError):
        FddeProblem(RELAX, (1,), InitialData(), T=1.0, h=0.125)


def test_callable_history_accepted():
    p = FddeProblem(UNIT_DELAY, (1, 1), InitialData({"11": 1.0}), HistorySpec({"11": lambda s: 1.0 + s}),
                    T=1.0, h=1 / 128)
    # delta' = delta(t - 1) = t on [0, 1]
    tr = solve_classical(p)[(1, 1)]
    assert np.allclose(tr.values, 1 + tr.times**2 / 2, atol=1e-12)


# ----------------------------------------------------------------- compare

traj = st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=20)


@settings(max_examples=50, deadline=None)
@given(traj)
def test_compare_identical_is_zero(vals):
    a = {(1, 1): SampledTrajectory(0.0, 0.1, vals)}
    assert compare(a, a)[(1, 1)] == 0.0


@settings(max_examples=50, deadline=None)
@given(traj, st.floats(1e-6, 1.0))
def test_compare_scales_with_offset(vals, eps):
    b = {(1, 1): SampledTrajectory(0.0, 0.1, vals)}
    a = {(1, 1): SampledTrajectory(0.0, 0.1, np.asarray(vals) + eps)}
    got = compare(a, b)[(1, 1)]
    want = np.max(eps / (1e-8 + 1e-3 * np.abs(vals)))
    assert got == pytest.approx(want, rel=1e-6)


def test_compare_grid_mismatch():
    a = {(1, 1): SampledTrajectory(0.0, 0.1, np.zeros(5))}
    with pytest.raises(DomainError):
        compare(a, {(1, 1): SampledTrajectory(0.0, 0.2, np.zeros(5))})
    with pytest.raises(DomainError):
        compare(a, {(1, 1): SampledTrajectory(0.0, 0.1, np.zeros(6))})
    with pytest.raises(DomainError):
        compare(a, {(1, 2): SampledTrajectory(0.0, 0.1, np.zeros(5))})


# ----------------------------------------------------------------- residual

class ConstantField:
    """A stationary solution u1 = c, u2 = 0 of R1 = g0 + g1 u1."""

    def __init__(self, kind):
        self.orders = (FracOrder(0.6, kind), FracOrder(0.6, kind))
        self.kind = self.orders[0].kind
        self.data = InitialData({"11": 2.0})
        self.space = SpacePair.from_mu((0, 0), (0, 0))

    def space_keys(self):
        return [(1, 1), (1, 2), (2, 1), (2, 2)]

    def delta(self, key, t):
        return np.full(np.shape(t), 2.0 if tuple(key) == (1, 1) else 0.0)


def test_constant_solution_has_zero_residual():
    op = DROperatorSpec.from_names({"g10": 1.0, "g11": -0.5}, tau=(1, 1))
    rep = pde_residual(ConstantField("caputo"), op, (0.0, 2.0), (0.0, 1.0), nt=65, nx=9)
    assert rep.max_abs < 1e-12
    assert rep.residual.shape == (2, 65, 9)


def test_residual_grid_validation():
    op = DROperatorSpec.from_names({}, tau=(1, 1))
    f = ConstantField("caputo")
    with pytest.raises(DomainError):
        pde_residual(f, op, (0.0, 2.0), (0.0, 1.0), nt=32)
    with pytest.raises(DomainError):
        pde_residual(f, op, (2.0, 1.0), (0.0, 1.0), nt=65)
    with pytest.raises(DomainError):
        pde_residual(ConstantField("rl"), op, (0.05, 2.0), (0.0, 1.0), nt=65)


def test_apply_operator_diffusion_term():
    op = DROperatorSpec.from_names({"a10": 2.0, "g13": 1.0}, tau=(1, 1))
    x = np.linspace(0, 1, 5)
    u = [x**2, np.zeros_like(x)]
    r = apply_operator(op, u, [2 * x, 0 * x], [2 + 0 * x, 0 * x], [0 * x, 0 * x])
    assert np.allclose(r[0], 4 + x**4)
    assert np.allclose(r[1], 0)


def test_example_residual_is_small():
    p = Example1Params(mu20=1, gamma10=0.3, gamma11=-1, gh11=0.5, gamma12=0.4, a12=0.5, a10=1, a22=0.6,
                       b21=-0.6, a20=0.3, b20=1, gamma22=1.2, gh22=0.4)
    beta = {"11": 1.0, "12": 0.5, "21": 0.8, "22": 0.6}
    f = solve_example1(p, "caputo", (0.8, 0.8), InitialData(beta), HistorySpec(beta))
    rep = pde_residual(f, p.operator(), (0.1, 2.0), (0.0, 1.0), nt=129, nx=17)
    assert rep.normalized() < 5e-3
    assert rep.to_csv().count("\n") == 129 * 17 + 1
