import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rispace.generators import ExpConvex, ExponentFunction, PowLogConcave, PowLogConvex, exponent_stats
from rispace.inclusions import (
    LimitKind,
    dss_orlicz_search,
    essential_range,
    index_gap,
    lorentz_inclusion,
    marcinkiewicz_inclusion,
    nakano_inclusion,
    orlicz_inclusion,
    small_o_at_zero,
)

LIN = PowLogConcave(1.0)
SQRT = PowLogConcave(0.5)


def test_small_o_examples():
    v = small_o_at_zero(LIN, SQRT)
    assert v.kind is LimitKind.TENDS_TO_ZERO and v.exact is LimitKind.TENDS_TO_ZERO
    v = small_o_at_zero(SQRT, SQRT)
    assert v.kind is LimitKind.BOUNDED_AWAY and v.exact is LimitKind.BOUNDED_AWAY
    # 1/ln(e/t) decays too slowly to drop below 1e-6 within 60 octaves
    v = small_o_at_zero(SQRT, PowLogConcave(0.5, 1.0))
    assert v.exact is LimitKind.TENDS_TO_ZERO
    assert v.kind in (LimitKind.TENDS_TO_ZERO, LimitKind.INCONCLUSIVE)
    assert all(np.diff(v.samples) < 0)


def test_small_o_samples_and_trend():
    v = small_o_at_zero(LIN, SQRT)
    k = np.arange(1, 61)
    np.testing.assert_allclose(v.samples, 2.0 ** (-k / 2), rtol=1e-12)
    assert v.trend == pytest.approx(-0.5, rel=1e-9)


def test_lorentz_inclusion_examples():
    v = lorentz_inclusion(SQRT, LIN)
    assert v.holds and v.constant <= 1.0 + 1e-12
    v = lorentz_inclusion(LIN, SQRT)
    assert v.holds is False
    v = lorentz_inclusion(SQRT, SQRT)
    assert v.holds and v.constant == pytest.approx(1.0)


def test_marcinkiewicz_inclusion_examples():
    assert marcinkiewicz_inclusion(LIN, SQRT).holds
    assert marcinkiewicz_inclusion(SQRT, LIN).holds is False
    v = marcinkiewicz_inclusion(SQRT, SQRT)
    assert v.holds and v.constant == pytest.approx(1.0)


def test_orlicz_inclusion_examples():
    v = orlicz_inclusion(PowLogConvex(2.0), PowLogConvex(1.0))
    assert v.holds and v.extra["T"] == 1.0 and v.extra["c"] == pytest.approx(1.0)
    assert orlicz_inclusion(PowLogConvex(1.0), PowLogConvex(2.0)).holds is False
    assert orlicz_inclusion(PowLogConvex(3.0), PowLogConvex(2.0, 1.0)).holds
    assert orlicz_inclusion(ExpConvex(1.0), PowLogConvex(5.0)).holds
    assert orlicz_inclusion(PowLogConvex(5.0), ExpConvex(1.0)).holds is False


def test_dss_examples():
    r = dss_orlicz_search(PowLogConvex(2.0), PowLogConvex(2.0), 1.0)
    assert r.found and r.n == 1
    assert r.points[0] == pytest.approx(1.0) and r.weights[0] == pytest.approx(1.0)
    for C in (1.0, 0.1, 1e-3):
        r = dss_orlicz_search(PowLogConvex(1.0), PowLogConvex(2.0), C)
        assert r.found
        assert r.points[0] >= 1.0 / C * (1 - 1e-12)
    r = dss_orlicz_search(PowLogConvex(2.0), PowLogConvex(1.0), 0.5)
    assert not r.found


def test_dss_warns_without_delta2():
    with pytest.warns(UserWarning, match="Delta_2"):
        r = dss_orlicz_search(ExpConvex(1.0), ExpConvex(1.0), 1.0)
    assert r.warnings


def test_dss_witnesses_validate_on_dense_grid():
    psi, phi = PowLogConvex(1.5), PowLogConvex(2.0, 1.0)
    r = dss_orlicz_search(psi, phi, 0.05)
    assert r.found
    t = np.geomspace(1.0, 2.0**40, 4001)
    lhs = sum(a * psi.value(t * x) for a, x in zip(r.weights, r.points))
    rhs = sum(a * phi.value(t * x) for a, x in zip(r.weights, r.points))
    assert np.all(lhs <= 0.05 * rhs * (1 + 1e-9))


def test_index_gap_examples():
    assert index_gap(PowLogConvex(2.0), PowLogConvex(3.0))
    assert not index_gap(PowLogConvex(2.0), PowLogConvex(2.0))
    assert index_gap(PowLogConvex(2.0, 1.0), PowLogConvex(2.5))


def test_essential_range_examples():
    assert essential_range(ExponentFunction.constant(2.0)).intervals == [(2.0, 2.0)]
    assert essential_range(ExponentFunction.step(3.0, 0.5, 2.0)).intervals == [(2.0, 2.0), (3.0, 3.0)]
    er = essential_range(ExponentFunction.affine(2.0, 3.0))
    assert er.intervals == [(2.0, 3.0)]
    assert 2.5 in er and 3.5 not in er


def test_nakano_inclusion_examples():
    two, three = ExponentFunction.constant(2.0), ExponentFunction.constant(3.0)
    assert nakano_inclusion(two, three).holds
    step = ExponentFunction.step(3.0, 0.5, 2.0)
    assert nakano_inclusion(step, step).holds
    assert nakano_inclusion(step, ExponentFunction.constant(2.5)).holds is False


# exponents on a grid: a gap of 1e-17 decays too slowly for any finite certificate
concave = st.builds(lambda a, f: PowLogConcave(a / 40, f / 8 * a / 40), st.integers(4, 40), st.integers(0, 8))


@settings(max_examples=100, deadline=None)
@given(concave, concave)
def test_small_o_implies_inclusions(phi, psi):
    v = small_o_at_zero(psi, phi)
    if v.kind is LimitKind.TENDS_TO_ZERO:
        assert lorentz_inclusion(phi, psi).holds
    w = small_o_at_zero(phi, psi)
    if w.kind is LimitKind.TENDS_TO_ZERO:
        assert marcinkiewicz_inclusion(phi, psi).holds


@settings(max_examples=100, deadline=None)
@given(concave, concave)
def test_numeric_verdict_matches_exact(phi, psi):
    v = small_o_at_zero(phi, psi)
    if v.kind is not LimitKind.INCONCLUSIVE:
        assert v.kind is v.exact


@settings(max_examples=100, deadline=None)
@given(concave, concave)
def test_lorentz_antisymmetry(phi, psi):
    if lorentz_inclusion(phi, psi).holds and lorentz_inclusion(psi, phi).holds:
        t = 2.0 ** -np.arange(0, 61)
        r = phi.value(t) / psi.value(t)
        assert np.all(np.isfinite(r)) and r.max() / r.min() < 1e6


exponents = st.one_of(
    st.floats(1.0, 6.0).map(ExponentFunction.constant),
    st.tuples(st.floats(1.0, 6.0), st.floats(0.05, 0.95), st.floats(1.0, 6.0)).map(lambda a: ExponentFunction.step(*a)),
    st.tuples(st.floats(1.0, 6.0), st.floats(1.0, 6.0)).map(lambda a: ExponentFunction.affine(*a)),
)


@settings(max_examples=100, deadline=None)
@given(exponents)
def test_essential_range_within_bounds(p):
    lo, hi = exponent_stats(p)
    er = essential_range(p)
    assert lo <= er.lower and er.upper <= hi
    assert er.lower == lo and er.upper == hi
    flat = [x for iv in er.intervals for x in iv]
    assert flat == sorted(flat)


@settings(max_examples=100, deadline=None)
@given(exponents, exponents)
def test_nakano_inclusion_matches_pointwise(p, q):
    t = np.linspace(0.0005, 0.9995, 2000)
    pointwise = bool(np.all(p.value(t) <= q.value(t) + 1e-12))
    v = nakano_inclusion(p, q)
    if v.holds:
        assert pointwise
