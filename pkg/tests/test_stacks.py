from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from synpa.errors import InvalidSampleError
from synpa.stacks import (
    AppClass,
    CounterSample,
    Gt100,
    IscStack,
    Lt100,
    RawStack,
    StackKind,
    StackPolicy,
    adjust_stack,
    build_raw_stack,
    classify_app,
    sample_to_stack,
)

A_BE_N = StackPolicy(Lt100.A_BE, Gt100.NORMALIZE)
ISC4_N = StackPolicy(Lt100.ISC4, Gt100.NORMALIZE)
ISC4_FE = StackPolicy(Lt100.ISC4, Gt100.REDUCE_FE)
ISC4_FEBE = StackPolicy(Lt100.ISC4, Gt100.REDUCE_FEBE)
ALL_POLICIES = [A_BE_N, ISC4_N, ISC4_FE, ISC4_FEBE,
                StackPolicy(Lt100.ISC4, Gt100.REDUCE_FEBE, febe_split="equal")]


def approx(values, expected, tol=1e-5):
    return all(abs(a - b) <= tol for a, b in zip(values, expected))


@pytest.mark.parametrize("counts, expected", [
    ((1000, 300, 400, 2000), (0.5, 0.3, 0.4)),
    ((1000, 200, 300, 1200), (0.3, 0.2, 0.3)),
    ((1000, 0, 0, 0), (0.0, 0.0, 0.0)),
])
def test_raw_stack_formulas(counts, expected):
    cycles, fe, be, spec = counts
    raw = build_raw_stack(CounterSample(cycles, fe, be, 0, spec))
    assert approx((raw.dispatch, raw.frontend, raw.backend), expected, 1e-12)


def test_raw_stack_sum():
    assert build_raw_stack(CounterSample(1000, 300, 400, 0, 2000)).sum == pytest.approx(1.2)


def test_zero_cycles_rejected():
    with pytest.raises(InvalidSampleError):
        build_raw_stack(CounterSample(0, 0, 0, 0, 0))


def test_negative_count_rejected():
    with pytest.raises(InvalidSampleError):
        CounterSample(1000, -1, 0, 0, 0)


def test_dispatch_width_parameter():
    raw = build_raw_stack(CounterSample(1000, 0, 0, 0, 2000), dispatch_width=2)
    assert raw.dispatch == 1.0


LT = RawStack(0.3, 0.2, 0.3)
GT = RawStack(0.5, 0.3, 0.4)


def test_lt100_a_be():
    s = adjust_stack(LT, A_BE_N)
    assert s.kind is StackKind.ISC3
    assert approx(s.values(), (0.3, 0.2, 0.5))


def test_lt100_isc4():
    s = adjust_stack(LT, ISC4_N)
    assert s.kind is StackKind.ISC4
    assert approx(s.values(), (0.3, 0.2, 0.3, 0.2))


def test_gt100_normalize():
    assert approx(adjust_stack(GT, ISC4_N).values(), (0.41667, 0.25, 0.33333, 0.0))


def test_gt100_reduce_fe():
    assert approx(adjust_stack(GT, ISC4_FE).values(), (0.5, 0.1, 0.4, 0.0))


def test_gt100_reduce_febe_weighted():
    # exact rational oracle for the weighted split
    d, fe, be = Fraction(1, 2), Fraction(3, 10), Fraction(2, 5)
    excess = d + fe + be - 1
    want = (d, fe - excess * fe / (fe + be), be - excess * be / (fe + be))
    assert sum(want) == 1
    assert approx(adjust_stack(GT, ISC4_FEBE).values()[:3], [float(v) for v in want], 1e-12)
    assert approx(adjust_stack(GT, ISC4_FEBE).values()[:3], (0.5, 0.21429, 0.28571))


def test_gt100_reduce_febe_equal_split():
    s = adjust_stack(GT, StackPolicy(Lt100.ISC4, Gt100.REDUCE_FEBE, febe_split="equal"))
    assert approx(s.values(), (0.5, 0.2, 0.3, 0.0), 1e-12)


def test_reduce_fe_spills_into_backend():
    s = adjust_stack(RawStack(0.9, 0.1, 0.3), ISC4_FE)
    assert approx(s.values(), (0.9, 0.0, 0.1, 0.0), 1e-12)


def test_dispatch_above_one_is_clamped_and_renormalised():
    s = adjust_stack(RawStack(1.3, 0.1, 0.1), ISC4_FEBE)
    assert s.values() == (1.0, 0.0, 0.0, 0.0)


def test_exact_unit_sum_is_identity():
    assert adjust_stack(RawStack(0.25, 0.25, 0.5), ISC4_N).values() == (0.25, 0.25, 0.5, 0.0)


def test_invalid_policy_combination():
    with pytest.raises(ValueError):
        StackPolicy(Lt100.A_BE, Gt100.REDUCE_FE)


@pytest.mark.parametrize("stack, cls", [
    ((0.2, 0.4, 0.4), AppClass.FRONTEND_BOUND),
    ((0.2, 0.1, 0.7), AppClass.BACKEND_BOUND),
    ((0.5, 0.2, 0.3), AppClass.OTHER),
])
def test_classification(stack, cls):
    assert classify_app(IscStack(StackKind.ISC3, *stack)) is cls


def test_classification_boundaries_are_strict():
    assert classify_app(IscStack(StackKind.ISC3, 0.3, 0.35, 0.35)) is AppClass.OTHER
    assert classify_app(IscStack(StackKind.ISC3, 0.35, 0.0, 0.65)) is AppClass.OTHER
    assert classify_app(IscStack(StackKind.ISC3, 0.3, 0.350001, 0.349999)) is AppClass.FRONTEND_BOUND


def test_iscstack_validation():
    with pytest.raises(ValueError):
        IscStack(StackKind.ISC3, 0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        IscStack(StackKind.ISC3, 0.5, 0.2, 0.2, 0.1)


def test_sample_to_stack():
    s = sample_to_stack(CounterSample(1000, 200, 300, 0, 1200), ISC4_N)
    assert approx(s.values(), (0.3, 0.2, 0.3, 0.2), 1e-12)


fraction = st.floats(0.0, 1.5, allow_nan=False)
raws = st.builds(RawStack, fraction, fraction, fraction).filter(lambda r: r.sum > 0)


@settings(max_examples=300, deadline=None)
@given(raws, st.sampled_from(ALL_POLICIES))
def test_adjusted_stack_sums_to_one(raw, policy):
    s = adjust_stack(raw, policy)
    assert abs(sum(s.values()) - 1.0) <= 1e-9
    assert min(s.values()) >= 0.0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3), st.sampled_from(ALL_POLICIES))
def test_idempotent_on_valid_stacks(parts, policy):
    total = sum(parts)
    raw = RawStack(*(p / total for p in parts))
    once = adjust_stack(raw, policy)
    again = adjust_stack(RawStack(once.dispatch, once.frontend, once.backend + once.horizontal_waste),
                         policy)
    assert approx(once.values()[:3], (raw.dispatch, raw.frontend, raw.backend), 1e-12)
    assert approx(again.values(), once.values(), 1e-12)


@settings(max_examples=200, deadline=None)
@given(raws.filter(lambda r: r.sum > 1 + 1e-9 and min(r.dispatch, r.frontend, r.backend) > 1e-6))
def test_normalize_preserves_ratios(raw):
    s = adjust_stack(raw, ISC4_N)
    assert s.frontend / s.dispatch == pytest.approx(raw.frontend / raw.dispatch, rel=1e-9)
    assert s.backend / s.dispatch == pytest.approx(raw.backend / raw.dispatch, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(raws.filter(lambda r: r.sum > 1 + 1e-9 and r.frontend >= r.sum - 1 and r.dispatch <= 1))
def test_reduce_fe_keeps_dispatch_and_backend(raw):
    s = adjust_stack(raw, ISC4_FE)
    assert s.dispatch == raw.dispatch
    assert s.backend == raw.backend


@settings(max_examples=200, deadline=None)
@given(raws.filter(lambda r: r.sum < 1 - 1e-9))
def test_lt100_variants_agree(raw):
    a = adjust_stack(raw, A_BE_N)
    b = adjust_stack(raw, ISC4_N)
    assert a.dispatch == b.dispatch and a.frontend == b.frontend
    assert a.backend == pytest.approx(b.backend + b.horizontal_waste, abs=1e-12)
