import numpy as np
import pytest
from hypothesis import given, strategies as st

from cantorcomb.numerics import WaveContext
from cantorcomb.oracle import (CombRealization, oracle_product, oracle_sub_trace,
                               oracle_transmission)
from cantorcomb.spp import dirac_comb_transmission


def test_single_delta():
    k = np.array([0.5, 1.0, 4.0])
    t = oracle_transmission(CombRealization((2.3,), 2.0), k)
    np.testing.assert_allclose(t, 1 / (1 + (2 / k) ** 2), rtol=1e-14)


def test_two_deltas_closed_form():
    # M22 = (1 - i z)^2 + z^2 e^{-2ika} for deltas at 0 and a.
    a, V = 1.7, 3.0
    k = np.linspace(0.2, 10, 400)
    z = V / k
    ref = 1 / np.abs((1 - 1j * z) ** 2 + z ** 2 * np.exp(-2j * k * a)) ** 2
    np.testing.assert_allclose(oracle_transmission(CombRealization((0.0, a), V), k), ref,
                               rtol=1e-12)


@given(st.lists(st.floats(-20, 20), min_size=1, max_size=12, unique=True),
       st.floats(-10, 10), st.floats(0.1, 20), st.floats(-50, 50))
def test_translation_and_mirror_invariance(xs, V, k, shift):
    xs = sorted(xs)
    if len(xs) > 1 and np.min(np.diff(xs)) < 1e-6:
        return
    comb = CombRealization(tuple(xs), V)
    t = oracle_transmission(comb, k)
    moved = CombRealization(tuple(x + shift for x in xs), V)
    assert oracle_transmission(moved, k) == pytest.approx(t, rel=1e-8, abs=1e-12)
    assert oracle_transmission(comb.mirrored(), k) == pytest.approx(t, rel=1e-8, abs=1e-12)


@given(st.lists(st.floats(0, 30), min_size=1, max_size=10, unique=True),
       st.floats(-10, 10), st.floats(0.1, 20))
def test_product_stays_unimodular(xs, V, k):
    xs = sorted(xs)
    if len(xs) > 1 and np.min(np.diff(xs)) < 1e-6:
        return
    mat, log_scale = oracle_product(CombRealization(tuple(xs), V), k)
    det = mat.det() * np.exp(2 * log_scale)
    assert abs(det - 1) < 1e-8 * max(1.0, float(np.abs(mat.max_abs()) * np.exp(log_scale)) ** 2)


def test_rescaling_deep_in_a_gap():
    # 60 strong deltas in a forbidden band: |M22| passes the rescaling
    # threshold while T ~ 1e-230 is still representable.
    n, r, V, k = 60, 1.0, 50.0, 1.0
    comb = CombRealization(tuple(np.arange(n) * r), V)
    mat, log_scale = oracle_product(comb, k)
    assert log_scale > 0
    t = oracle_transmission(comb, k)
    ref = dirac_comb_transmission(n, r, WaveContext(k, V))
    assert 0 < t < 1e-200
    assert np.log(t) == pytest.approx(np.log(ref), rel=1e-10)


def test_sub_trace_of_single_delta():
    k = np.linspace(0.3, 7, 50)
    g = oracle_sub_trace(CombRealization((0.0,), 1.5), k, 2.2)
    np.testing.assert_allclose(g, np.cos(2.2 * k) + 1.5 / k * np.sin(2.2 * k), atol=1e-13)


def test_positions_validation():
    with pytest.raises(ValueError):
        CombRealization((1.0, 1.0), 1.0)
    with pytest.raises(ValueError):
        CombRealization((), 1.0)
    with pytest.raises(ValueError):
        oracle_transmission(CombRealization((0.0,), 1.0), 0.0)
