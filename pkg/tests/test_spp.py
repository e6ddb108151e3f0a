import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cantorcomb.geometry import CdcSpec, delta_positions
from cantorcomb.numerics import WaveContext, chebyshev_u
from cantorcomb.oracle import CombRealization, oracle_sub_trace, oracle_transmission
from cantorcomb.spp import (SppSpec, dirac_comb_transmission, gamma_sequence,
                            gamma_sequence_binary, reflection, scaling_function,
                            transmission, transmission_laue, u_factors)

# Frozen from a 50-digit mpmath transfer-matrix product over exact rational positions.
FROZEN = [
    ((2, 3.5, 20.0, 3), 1.0, 0.5, 1.090694433888457931e-8),
    ((2, 3.5, 20.0, 3), 1.0, 1.3, 0.059166753069326401688),
    ((2, 3.5, 20.0, 3), 1.0, 2.7, 0.21156152947861102994),
    ((3, 5.0, 50.0, 2), 2.0, 0.9, 0.99610804888191651889),
    ((3, 5.0, 50.0, 2), 2.0, 1.7, 0.000079355274047616416712),
    ((2, 3.0, 20.0, 2), -1.0, 1.1, 0.56395815246453400184),
]


@st.composite
def spp_specs(draw, max_order=4, max_count=5):
    order = draw(st.integers(1, max_order))
    counts = draw(st.lists(st.integers(1, max_count), min_size=order, max_size=order))
    dists, reach = [], 0.0
    for n in counts:
        # Each block must clear the previous one so deltas never collide.
        d = reach + draw(st.floats(0.2, 3.0))
        dists.append(d)
        reach += (n - 1) * d
    return SppSpec.from_counts(counts, dists, draw(st.floats(-15, 15)))


@pytest.mark.parametrize("cdc, V, k, expected", FROZEN)
def test_frozen_transmission(cdc, V, k, expected):
    t = transmission(SppSpec.from_cdc(CdcSpec(*cdc), V), k)
    assert t == pytest.approx(expected, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(spp_specs(), st.floats(0.1, 20.0))
def test_engine_matches_oracle(spec, k):
    comb = CombRealization(tuple(spec.layout.expand()), spec.V)
    assert transmission(spec, k) == pytest.approx(oracle_transmission(comb, k), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(spp_specs(max_order=3), st.floats(0.1, 10.0))
def test_gamma_is_half_trace_of_sub_comb(spec, k):
    gammas = gamma_sequence(spec, k)
    for q in range(spec.order):
        sub = spec.layout.truncated(q) if q else None
        positions = sub.expand() if sub else np.array([0.0])
        comb = CombRealization(tuple(positions), spec.V)
        ref = oracle_sub_trace(comb, k, spec.layout.distances[q])
        assert gammas[q] == pytest.approx(ref, rel=1e-8, abs=1e-8)


@given(spp_specs(), st.floats(0.1, 20.0))
def test_gamma_is_real(spec, k):
    z = gamma_sequence(spec, k, complex_mode=True).values
    real = gamma_sequence(spec, k).values
    np.testing.assert_allclose(z.imag, 0.0, atol=1e-9 * (1 + np.abs(real).max()))
    np.testing.assert_allclose(z.real, real, rtol=1e-9, atol=1e-9)


def test_first_gamma_closed_form():
    spec = SppSpec.from_counts((3,), (1.7,), 2.5)
    k = np.linspace(0.2, 9, 200)
    np.testing.assert_allclose(gamma_sequence(spec, k)[0],
                               np.cos(k * 1.7) + 2.5 / k * np.sin(k * 1.7), atol=1e-13)


@settings(deadline=None)
@given(st.integers(1, 6), st.floats(-10, 10), st.floats(0.1, 20))
def test_binary_path_matches_general(order, V, k):
    dists = tuple(1.3 * 2.1 ** q for q in range(order))
    spec = SppSpec.from_counts((2,) * order, dists, V)
    a, b = gamma_sequence(spec, k).values, gamma_sequence_binary(spec, k).values
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)


def test_binary_path_rejects_other_counts():
    with pytest.raises(ValueError):
        gamma_sequence_binary(SppSpec.from_counts((2, 3), (1.0, 3.0), 1.0), 1.0)


def test_zero_strength_is_transparent():
    spec = SppSpec.from_cdc(CdcSpec(3, 6.0, 20.0, 3), 0.0)
    np.testing.assert_array_equal(transmission(spec, np.linspace(0.1, 20, 500)), 1.0)


@given(spp_specs(), st.floats(0.1, 30.0))
def test_probability_conservation(spec, k):
    t, r = transmission(spec, k), reflection(spec, k)
    assert 0.0 <= t <= 1.0
    assert t + r == pytest.approx(1.0, abs=1e-12)


@given(st.integers(1, 12), st.floats(0.3, 5), st.floats(-10, 10), st.floats(0.1, 20))
def test_order_one_is_dirac_comb(n, r1, V, k):
    spec = SppSpec.from_counts((n,), (r1,), V)
    assert transmission(spec, k) == pytest.approx(
        dirac_comb_transmission(n, r1, WaveContext(k, V)), abs=1e-12)


def test_single_delta():
    spec = SppSpec.from_counts((1,), (1.0,), 3.0)
    k = np.linspace(0.5, 10, 20)
    np.testing.assert_allclose(transmission(spec, k), 1 / (1 + (3 / k) ** 2), rtol=1e-14)


@pytest.mark.parametrize("N, rho, L", [(2, 3.0, 20.0), (3, 5.0, 50.0), (4, 7.0, 30.0)])
def test_periodic_reduction(N, rho, L):
    k = np.linspace(0.1, 20, 4000)
    cdc = transmission(SppSpec.from_cdc(CdcSpec(N, rho, L, 2), 1.0), k)
    comb = dirac_comb_transmission(2 * N, L / rho, WaveContext(k, 1.0))
    np.testing.assert_allclose(cdc, comb, atol=1e-10)


def test_laue_form_agrees_inside_bands():
    spec = SppSpec.from_counts((2, 3, 2), (1.25, 2.0, 6.0), 2.0)
    k = np.linspace(0.1, 12, 20000)
    g = gamma_sequence(spec, k).values
    inside = np.all(np.abs(g) <= 1, axis=0)
    assert inside.sum() > 100
    np.testing.assert_allclose(transmission_laue(spec, k[inside]), transmission(spec, k[inside]),
                               atol=1e-10)


def test_large_k_reflection_scaling():
    spec = SppSpec.from_cdc(CdcSpec(2, 3.5, 20.0, 4), 1.0)
    k = np.linspace(1e3, 1.001e3, 2000)
    r = reflection(spec, k)
    approx = (1.0 / k) ** 2 * scaling_function(spec, k)
    mask = r < 1e-4
    assert mask.sum() > 100
    np.testing.assert_allclose(approx[mask], r[mask], rtol=1e-3)


def test_u_factors_shape():
    spec = SppSpec.from_counts((2, 3), (1.0, 3.0), 1.0)
    assert u_factors(spec, np.linspace(1, 2, 7)).shape == (2, 7)


def test_unit_cell_summary():
    m12, m22, tau = SppSpec.from_counts((2,), (1.0,), 2.0).unit_cell(4.0)
    assert (m12, m22, tau) == pytest.approx((0.5, np.sqrt(1.25), -np.arctan(0.5)))


@pytest.mark.parametrize("k", [0.0, -2.0])
def test_rejects_non_positive_k(k):
    spec = SppSpec.from_counts((2,), (1.0,), 1.0)
    with pytest.raises(ValueError):
        transmission(spec, k)


def test_dirac_comb_validation():
    with pytest.raises(ValueError):
        dirac_comb_transmission(0, 1.0, WaveContext(1.0, 1.0))
    with pytest.raises(ValueError):
        dirac_comb_transmission(2, 0.0, WaveContext(1.0, 1.0))


def test_cdc_matches_oracle_on_positions():
    cdc = CdcSpec(4, 5.0, 20.0, 3)
    k = np.linspace(0.1, 20, 3000)
    comb = CombRealization(tuple(delta_positions(cdc)), 5.0)
    np.testing.assert_allclose(transmission(SppSpec.from_cdc(cdc, 5.0), k),
                               oracle_transmission(comb, k), atol=1e-9)
