import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from segi.baseline import MeasurementSet, correlate, correlate_raw, run_traditional_gi
from segi.imaging import measure_buckets
from segi.scenes import random_shapes_object

O3 = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])


def raster_set(obj):
    h, w = obj.shape
    pats = np.eye(h * w).reshape(h * w, h, w)
    return MeasurementSet(pats, measure_buckets(pats, obj))


def test_raster_3x3_against_hand_evaluation():
    # <S I> - <S><I> with P = 9 raster patterns and sum(O) = 5:
    # lit pixels give 1/9 - 5/81 = 4/81, dark ones 0 - 5/81
    raw = correlate_raw(raster_set(O3))
    expect = np.where(O3 == 1.0, 4 / 81, -5 / 81)
    np.testing.assert_allclose(raw, expect, rtol=1e-12, atol=1e-15)
    np.testing.assert_array_equal(correlate(raster_set(O3)), O3)


def test_raster_recovers_16x16_binary_object():
    obj = random_shapes_object((16, 16), np.random.default_rng(3), 0.3)
    np.testing.assert_allclose(correlate(raster_set(obj)), obj, atol=1e-12)


def test_constant_signals_give_zero():
    pats = np.zeros((6, 4, 4))
    for i in range(6):
        pats[i].flat[i : i + 5] = 1.0  # equal weights
    mset = MeasurementSet(pats, measure_buckets(pats, np.ones((4, 4))))
    np.testing.assert_allclose(correlate_raw(mset), 0.0, atol=1e-12)
    np.testing.assert_array_equal(correlate(mset), 0.0)


def test_repeated_pattern_gives_zero():
    p = (np.random.default_rng(0).random((5, 5)) < 0.5).astype(float)
    pats = np.repeat(p[None], 7, axis=0)
    mset = MeasurementSet(pats, measure_buckets(pats, O3.repeat(2, 0).repeat(2, 1)[:5, :5]))
    np.testing.assert_allclose(correlate_raw(mset), 0.0, atol=1e-12)


def test_too_few_measurements():
    with pytest.raises(ValueError):
        correlate_raw(MeasurementSet(np.ones((1, 2, 2)), [1.0]))
    with pytest.raises(ValueError):
        run_traditional_gi(O3, 1, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        MeasurementSet(np.ones((3, 2, 2)), [1.0, 2.0])


def _random_set(seed, n=40):
    rng = np.random.default_rng(seed)
    pats = (rng.random((n, 6, 6)) < 0.5).astype(float)
    return MeasurementSet(pats, rng.random(n) * 10)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_permutation_invariance(seed):
    mset = _random_set(seed)
    perm = np.random.default_rng(seed + 1).permutation(len(mset))
    shuffled = MeasurementSet(mset.patterns[perm], mset.signals[perm])
    np.testing.assert_allclose(correlate_raw(shuffled), correlate_raw(mset), atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(-50, 50))
@settings(max_examples=25)
def test_signal_shift_invariance(seed, c):
    mset = _random_set(seed)
    shifted = MeasurementSet(mset.patterns, mset.signals + c)
    np.testing.assert_allclose(correlate_raw(shifted), correlate_raw(mset), atol=1e-9)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
@settings(max_examples=25)
def test_signal_scaling(seed, a):
    mset = _random_set(seed)
    scaled = MeasurementSet(mset.patterns, mset.signals * a)
    np.testing.assert_allclose(correlate_raw(scaled), a * correlate_raw(mset), rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(correlate(scaled), correlate(mset), atol=1e-9)


def _pearson(a, b):
    return np.corrcoef(np.ravel(a), np.ravel(b))[0, 1]


def test_random_pattern_gi_correlates_with_object():
    obj = random_shapes_object((16, 16), np.random.default_rng(0), 0.25)
    wins = 0
    for seed in range(10):
        _, mset = run_traditional_gi(obj, 2560, rng=np.random.default_rng(seed))
        wins += _pearson(correlate_raw(mset), obj) > 0.5
    assert wins >= 9


def test_random_pattern_signals_have_no_trend():
    obj = random_shapes_object((16, 16), np.random.default_rng(0), 0.25)
    _, mset = run_traditional_gi(obj, 2000, rng=np.random.default_rng(42))
    fit = stats.linregress(np.arange(len(mset)), mset.signals)
    assert fit.pvalue > 0.05
