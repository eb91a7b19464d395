import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rispace.errors import DomainError, OverlapError
from rispace.funcrep import (
    PiecewiseFunction,
    Segment,
    decreasing_rearrangement,
    disjoint_sum,
    distribution_function,
    evaluate,
    indicator,
    power_function,
    translate_dilate,
)
from conftest import random_piecewise


def block_witness():
    # (t - 1/4)^(-1/3) on (1/4, 1/2]
    return power_function(1.0, -1.0 / 3.0, 0.25, 0.5)


def test_evaluate_examples():
    assert evaluate(indicator(0, 0.5), 0.25) == 1.0
    assert evaluate(power_function(1.0, -0.5), 0.25) == pytest.approx(2.0, rel=1e-15)
    assert evaluate(block_witness(), 3 / 8) == pytest.approx(2.0, rel=1e-14)
    assert evaluate(indicator(0, 0.5), 0.75) == 0.0


def test_distribution_examples():
    chi = indicator(0, 0.5)
    assert distribution_function(chi, 0.5) == pytest.approx(0.5)
    assert distribution_function(chi, 1.0) == 0.0
    assert distribution_function(power_function(1.0, 1.0), 1 / 3) == pytest.approx(2 / 3, rel=1e-14)
    assert distribution_function(power_function(1.0, -0.5), 2.0) == pytest.approx(0.25, rel=1e-14)


def test_rearrangement_examples():
    xs = decreasing_rearrangement(power_function(1.0, 1.0))
    t = np.linspace(0.01, 0.99, 50)
    np.testing.assert_allclose(xs.evaluate(t), 1 - t, rtol=1e-12)
    xs = decreasing_rearrangement(indicator(0.5, 0.75, 3.0))
    np.testing.assert_allclose(xs.evaluate(np.array([0.1, 0.24, 0.26, 0.9])), [3, 3, 0, 0])
    xs = decreasing_rearrangement(block_witness())
    t = np.array([0.01, 0.1, 0.2, 0.3])
    np.testing.assert_allclose(xs.evaluate(t), [0.01 ** (-1 / 3), 0.1 ** (-1 / 3), 0.2 ** (-1 / 3), 0.0], rtol=1e-10)


def test_rearrangement_block_sorted_samples():
    # brute force: sort a fine midpoint sample of |f| and compare in L1
    f = block_witness()
    n = 1_000_000
    t = (np.arange(n) + 0.5) / n
    sorted_vals = np.sort(np.abs(f.evaluate(t)))[::-1]
    xs = decreasing_rearrangement(f).evaluate(t)
    assert np.mean(np.abs(sorted_vals - xs)) < 1e-3


def test_rearrangement_zero_is_flagged():
    xs = decreasing_rearrangement(PiecewiseFunction.zero())
    assert xs.degenerate
    assert xs.evaluate(0.5) == 0.0


def test_translate_dilate_examples():
    f = power_function(1.0, 1.0)
    t = np.linspace(0.01, 1, 20)
    np.testing.assert_allclose(translate_dilate(f, 0.0, 1.0).evaluate(t), f.evaluate(t))
    g = translate_dilate(indicator(0, 1), 0.5, 0.25)
    np.testing.assert_allclose(g.evaluate(np.array([0.4, 0.6, 0.75, 0.8])), [0, 1, 1, 0])
    assert evaluate(translate_dilate(f, 0.5, 0.5), 0.75) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        translate_dilate(f, 0.5, 0.75)
    with pytest.raises(DomainError):
        translate_dilate(f, 1.0, 0.1)


def test_disjoint_sum_examples():
    f = power_function(2.0, 0.5)
    np.testing.assert_allclose(disjoint_sum([f], [1.0]).evaluate(np.array([0.3, 0.7])), f.evaluate(np.array([0.3, 0.7])))
    s = disjoint_sum([indicator(0, 0.5), indicator(0.5, 1)], [2.0, -3.0])
    assert abs(evaluate(s, 0.75)) == 3.0
    with pytest.raises(OverlapError):
        disjoint_sum([indicator(0, 0.6), indicator(0.5, 1)])


def test_spanning_terms_sum_matches_member():
    x = power_function(1.0, -0.25)
    xs = [translate_dilate(x, 1 - 2.0 ** (1 - k), 2.0 ** (-k)) for k in range(1, 5)]
    s = disjoint_sum(xs)
    t = 0.6  # inside the support of the second term
    assert evaluate(s, t) == pytest.approx(evaluate(xs[1], t), rel=1e-15)


def test_json_round_trip():
    rng = np.random.default_rng(3)
    f = random_piecewise(rng, 4)
    g = PiecewiseFunction.from_json(f.to_json())
    t = np.linspace(0.001, 1, 300)
    np.testing.assert_allclose(g.evaluate(t), f.evaluate(t), rtol=1e-15)
    json.loads(f.to_json())


def test_segment_rejects_bad_interval():
    with pytest.raises(Exception):
        Segment.constant(0.5, 0.4, 1.0)
    with pytest.raises(Exception):
        Segment.constant(0.5, 1.2, 1.0)


seeds = st.integers(0, 2**31 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_equimeasurability(seed):
    rng = np.random.default_rng(seed)
    f = random_piecewise(rng)
    xs = decreasing_rearrangement(f)
    top = max(float(np.max(np.abs(f.evaluate(np.linspace(0.01, 1, 200))))), 1.0)
    levels = np.geomspace(1e-3, 2 * top, 25)
    for s in levels:
        assert abs(distribution_function(f, s) - xs.distribution_function(s)) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(0.0, 0.9), st.floats(0.05, 1.0))
def test_dilation_law(seed, a, frac):
    rng = np.random.default_rng(seed)
    f = random_piecewise(rng)
    r = frac * (1.0 - a)
    g = translate_dilate(f, a, r)
    for s in np.geomspace(1e-2, 10, 12):
        assert abs(distribution_function(g, s) - r * distribution_function(f, s)) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_rearrangement_is_monotone(seed):
    rng = np.random.default_rng(seed)
    xs = decreasing_rearrangement(random_piecewise(rng))
    v = xs.evaluate(np.sort(rng.uniform(1e-6, 1, 400)))
    assert np.all(np.diff(v) <= 1e-12 * np.maximum(1, np.abs(v[:-1])))
