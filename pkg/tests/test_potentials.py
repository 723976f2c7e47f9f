import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from diracfdtd import (RampPotentialSpec, StepPotentialSpec, classify, make_grid, sample_ramp,
                       sample_step, to_internal)
from diracfdtd.potentials import PotentialError


@pytest.fixture
def grid():
    return make_grid(1, [400], 0.01, -2.0)


def test_zero_step(grid):
    assert not sample_step(grid, StepPotentialSpec(0.0, 0.0)).eA0.any()


def test_step_25mv(grid):
    v = to_internal(25e6, "potential_volts")
    assert_allclose(v, 48.92, atol=0.01)
    prof = sample_step(grid, StepPotentialSpec(v, 0.0))
    x = grid.axis_coords(0)
    assert (prof.eA0[x >= 0] == v).all()
    assert (prof.eA0[x < 0] == 0).all()


def test_step_edge_outside(grid):
    with pytest.raises(PotentialError):
        sample_step(grid, StepPotentialSpec(1.0, grid.extent(0)[1] + 1))


def test_step_2d_depends_on_x_only():
    g = make_grid(2, [20, 10], 0.1, (-1.0, -0.5))
    e = sample_step(g, StepPotentialSpec(2.0, 0.0)).eA0
    assert (e == e[:, :1]).all()


def test_ramp_paper_values():
    g = make_grid(1, [600], 0.01, -2.0)
    a = to_internal(50e-14, "length_m")
    eps = to_internal(-50e18, "field_volts_per_m")
    v = to_internal(25e6, "potential_volts")
    prof = sample_ramp(g, RampPotentialSpec(v, a, eps))
    assert_allclose(a, 1.295, atol=1e-3)
    x = g.axis_coords(0)
    assert (prof.eA0[x < 0] == 0).all()
    assert (prof.eA0[x > a] == v).all()
    assert (np.diff(prof.eA0) >= 0).all()


def test_ramp_zero():
    g = make_grid(1, [100], 0.01, -0.5)
    assert not sample_ramp(g, RampPotentialSpec(0.0, 0.2, 0.0)).eA0.any()


def test_ramp_discontinuous():
    with pytest.raises(PotentialError):
        RampPotentialSpec(48.92, 1.295, -30.0)
    with pytest.raises(PotentialError):
        RampPotentialSpec(1.0, 0.0, -1.0)


def test_ramp_midpoint_sample():
    g = make_grid(1, [241], 0.01, -1.0)   # x = 0.5 is a cell centre
    prof = sample_ramp(g, RampPotentialSpec.from_plateau(3.0, 1.0))
    i = int(np.argmin(abs(g.axis_coords(0) - 0.5)))
    assert_allclose(prof.eA0[i], 1.5, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(-100, 100, allow_nan=False), st.floats(-1.5, 1.5))
def test_sign_flip_negates(v, edge):
    g = make_grid(1, [64], 0.05, -1.6)
    p = sample_step(g, StepPotentialSpec(v, edge))
    q = sample_step(g, StepPotentialSpec(-v, edge))
    assert_allclose(q.eA0, -p.eA0)
    assert_allclose(p.negated().eA0, q.eA0)


def test_sampling_is_deterministic(grid):
    a = sample_step(grid, StepPotentialSpec(1.7, 0.13)).eA0
    b = sample_step(grid, StepPotentialSpec(1.7, 0.13)).eA0
    assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("eV, E, regime", [
    (48.92, 36.704, "supercritical"),
    (9.78, 36.704, "subcritical"),
    (37.704, 36.704, "critical-margin"),
    (-48.92, 36.704, "supercritical"),
])
def test_classify(eV, E, regime):
    r = classify(eV, E, 1.0)
    assert r.regime == regime
    assert r.threshold == pytest.approx(E + 1.0)
    assert r.eV == eV
