import random
from fractions import Fraction

import pytest

from fracdr.catalog import (
    COEFF_VALUES,
    MU_VALUES,
    catalog,
    derive_correction,
    get_case,
    sample_params,
)
from fracdr.subspace import SLOTS, annihilate, check_invariance, expand

IDS = ["1.1", "1.2", "1.3", "1.4", "1.5", "1.6", "1.7", "1.8", "1.9",
       "2.1", "2.2", "2.3", "2.4", "2.5", "3.1", "3.2", "4.1", "4.2", "5"]
PRINTED_INVARIANT = {"1.1", "1.3", "1.5", "1.7", "1.8", "2.1", "2.3", "2.4", "2.5", "3.1", "4.1", "5"}
CASES = {c.case_id: c for c in catalog()}


def samples(case, n=4, seed=0):
    rng = random.Random(f"{case.case_id}-{seed}")
    return [sample_params(case, rng) for _ in range(n)]


def test_case_list_in_order():
    assert [c.case_id for c in catalog()] == IDS


def test_get_case():
    assert get_case("4.1").family == "polynomial-trigonometric"
    with pytest.raises(KeyError):
        get_case("9.9")


@pytest.mark.parametrize("case_id", IDS)
def test_every_instance_is_invariant(case_id):
    case = CASES[case_id]
    for p in samples(case):
        assert set(p.values()) <= set(COEFF_VALUES) | set(MU_VALUES)
        op, space = case.build(p)
        rep = check_invariance(op, space)
        assert rep.invariant, (case_id, p, rep.summary())


@pytest.mark.parametrize("case_id", sorted(PRINTED_INVARIANT))
def test_printed_family_invariant(case_id):
    case = CASES[case_id]
    for p in samples(case, seed=1):
        assert check_invariance(*case.printed(p)).invariant


@pytest.mark.parametrize("case_id", sorted(set(IDS) - PRINTED_INVARIANT))
def test_printed_family_rejected(case_id):
    case = CASES[case_id]
    assert case.has_discrepancy
    verdicts = [check_invariance(*case.printed(p)).invariant for p in samples(case, n=6, seed=2)]
    assert not all(verdicts)


@pytest.mark.parametrize("case_id", [c.case_id for c in catalog() if c.machine_input is not None])
def test_machine_correction_reproduces_corrected_family(case_id):
    case = CASES[case_id]
    for p in samples(case, n=3, seed=3):
        op_in, space_in = case.machine_input(p)
        corr = derive_correction(op_in, space_in)
        assert corr is not None
        fixed = corr.apply(op_in)
        assert check_invariance(fixed, space_in).invariant
        target, _ = case.corrected(p)
        for (k, slot), (_, new) in corr.changes.items():
            assert float(new) == pytest.approx(float(target.slot(k, slot)), abs=1e-9), (case_id, k, slot)


def test_projection_and_annihilation_agree():
    for case in catalog():
        p = samples(case, n=1, seed=4)[0]
        for build in filter(None, (case.printed, case.corrected)):
            op, space = build(p)
            rep = check_invariance(op, space)
            r = expand(op, space)
            killed = all(annihilate(space.basis(k), r[k - 1]).close_to(type(r[0])(), tol=1e-9) for k in (1, 2))
            assert killed == rep.invariant, case.case_id


def test_scaled_instances_stay_invariant():
    for case in catalog():
        p = samples(case, n=1, seed=5)[0]
        op, space = case.build(p)
        assert check_invariance(op.scaled(Fraction(-3, 2)), space).invariant


def test_describe_lists_discrepancies():
    text = get_case("2.2").describe()
    assert "L{1, x}" in text
    assert "gamma_15" in text
    assert "discrepancies: none" in get_case("1.1").describe()


def test_slot_names_cover_operator():
    assert len(SLOTS) == 14
