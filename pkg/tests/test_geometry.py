import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from cantorcomb.geometry import (CdcSpec, SuperPeriodicLayout, critical_rho, delta_positions,
                                 geometry_dump, layout, segment_length)


@st.composite
def cdc_specs(draw):
    n = draw(st.integers(2, 5))
    rho = draw(st.floats(n - 1 + 0.05, 4 * n))
    return CdcSpec(n, rho, draw(st.floats(0.5, 100.0)), draw(st.integers(1, 4)))


def test_stage_two_quarter_points():
    np.testing.assert_allclose(delta_positions(CdcSpec(2, 3.0, 1.0, 2)), [0, 1 / 3, 2 / 3, 1],
                               atol=1e-15)


def test_stage_three_has_eight_deltas():
    assert delta_positions(CdcSpec(2, 3.0, 1.0, 3)).size == 8


def test_critical_rho_gives_equal_spacing():
    pos = delta_positions(CdcSpec(3, 5.0, 1.0, 2))
    assert pos.size == 6
    np.testing.assert_allclose(np.diff(pos), 0.2, atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_critical_rho_value(n):
    assert critical_rho(n) == 2 * n - 1
    pos = delta_positions(CdcSpec(n, critical_rho(n), 10.0, 2))
    np.testing.assert_allclose(np.diff(pos), np.diff(pos)[0], rtol=1e-12)


def test_stage_one_is_two_endpoints():
    lay = layout(CdcSpec(4, 6.0, 7.0, 1))
    assert lay.counts == (2,) and lay.distances == (7.0,)
    np.testing.assert_array_equal(delta_positions(CdcSpec(4, 6.0, 7.0, 1)), [0.0, 7.0])


def test_closed_form_distances():
    spec = CdcSpec(3, 4.0, 20.0, 3)
    lay = layout(spec)
    assert lay.counts == (2, 3, 3)
    shrink = 1 - 2 / 4.0
    assert lay.distances[0] == pytest.approx(20 / 9 * shrink ** 2)
    assert lay.distances[1] == pytest.approx(20 * 1.25 / 9 * shrink)
    assert lay.distances[2] == pytest.approx(20 * 1.25 / 3)


@given(cdc_specs())
def test_layout_expansion_matches_cantor_boundaries(spec):
    pos = delta_positions(spec)
    assert pos.size == spec.delta_count == 2 * spec.N ** (spec.S - 1)
    np.testing.assert_allclose(layout(spec).expand(), pos, atol=1e-12 * spec.L)


@given(cdc_specs())
def test_positions_span_and_mirror(spec):
    pos = delta_positions(spec)
    assert pos[0] == 0.0
    assert pos[-1] == pytest.approx(spec.L, rel=1e-12)
    assert np.all(np.diff(pos) > 0)
    np.testing.assert_allclose(pos[::-1], spec.L - pos, atol=1e-12 * spec.L)


@given(cdc_specs())
def test_extent_equals_length(spec):
    assert layout(spec).extent == pytest.approx(spec.L, rel=1e-12)


@given(cdc_specs(), st.integers(0, 5))
def test_segment_length_shrinks_geometrically(spec, stage):
    ratio = (1 - (spec.N - 1) / spec.rho) / spec.N
    assert segment_length(spec, stage) == pytest.approx(spec.L * ratio ** stage)


def test_rho_plus_minus():
    spec = CdcSpec(2, 4.0, 1.0, 2)
    assert spec.rho_plus == 1.25
    assert spec.rho_minus == 0.75


@pytest.mark.parametrize("args", [(1, 3.0, 1.0, 2), (2, 1.0, 1.0, 2), (2, 0.5, 1.0, 2),
                                  (2, 3.0, 0.0, 2), (2, 3.0, -1.0, 2), (2, 3.0, 1.0, 0)])
def test_invalid_specs(args):
    with pytest.raises(ValueError):
        CdcSpec(*args)


def test_layout_validation_and_truncation():
    with pytest.raises(ValueError):
        SuperPeriodicLayout((2, 3), (1.0,))
    with pytest.raises(ValueError):
        SuperPeriodicLayout((0,), (1.0,))
    with pytest.raises(ValueError):
        SuperPeriodicLayout((2,), (-1.0,))
    lay = SuperPeriodicLayout((2, 3, 4), (1.0, 3.0, 10.0))
    assert lay.order == 3
    assert lay.truncated(2) == SuperPeriodicLayout((2, 3), (1.0, 3.0))
    assert lay.extent == 1 + 6 + 30
    assert lay.expand().size == 24


def test_single_delta_layout():
    np.testing.assert_array_equal(SuperPeriodicLayout((1,), (1.0,)).expand(), [0.0])


def test_geometry_dump_fields():
    dump = geometry_dump(CdcSpec(2, 3.0, 1.0, 2))
    assert set(dump) == {"N", "rho", "L", "S", "counts", "distances", "positions"}
    assert dump["counts"] == [2, 2]
    assert len(dump["positions"]) == 4
