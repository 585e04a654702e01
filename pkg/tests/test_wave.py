"""Tests for the tangent wave solvers: integral representation, source
iteration, and the three-level leapfrog.

Exact discrete identities used as oracles: the standing-mode factor
cos(2 pi m dx) of the source-free representation, the quadratic ramp under a
constant source, the vanishing contribution of x-uniform characteristic
sources, exact translation transport of the leapfrog at dt = dx, and the
resting circle as a leapfrog equilibrium.
"""

import math

import numpy as np
import pytest

from elwire.errors import CflError, NonContractionError
from elwire.fields import CurveState, Grid, circ_diff, m0
from elwire.wave import (
    WaveData,
    characteristic_derivatives,
    leapfrog_step,
    picard_wave_solve,
    wave_integral,
    wave_series,
)

EXACT_TOL = 1e-12
TRANSPORT_TOL = 1e-11
ORDER_MIN = 1.8
TWO_PI = 2.0 * math.pi


def rotation_field(grid: Grid) -> np.ndarray:
    x = grid.points()
    return np.column_stack([np.cos(TWO_PI * x), np.sin(TWO_PI * x)])


def translation_data(grid: Grid) -> WaveData:
    a = rotation_field(grid)
    return WaveData(a=a, b=-circ_diff(a, grid.dx), f=None, h=None, grid=grid)


# ---------------------------------------------------------------------------
# data container


def test_wave_data_validates_shapes_and_admissibility():
    grid = Grid(16)
    a = rotation_field(grid)
    zero = np.zeros_like(a)
    with pytest.raises(ValueError, match="share shape"):
        WaveData(a=a, b=np.zeros((8, 2)), f=None, h=None, grid=grid)
    with pytest.raises(ValueError, match="admissible"):
        WaveData(a=2.0 * a, b=zero, f=None, h=None, grid=grid)
    with pytest.raises(ValueError, match="admissible"):
        WaveData(a=a, b=a, f=None, h=None, grid=grid)
    # the admissibility gate is skippable for synthetic forcing studies
    data = WaveData(a=2.0 * a, b=a, f=None, h=None, grid=grid, unit_data=False)
    assert data.n_levels is None
    with pytest.raises(ValueError, match="source series"):
        WaveData(a=a, b=zero, f=np.zeros((4, 8, 2)), h=None, grid=grid)
    data = WaveData(a=a, b=zero, f=np.zeros((5, 16, 2)), h=np.zeros((3, 16, 2)), grid=grid)
    assert data.n_levels == 2


# ---------------------------------------------------------------------------
# integral representation


def test_source_free_standing_mode_is_exact():
    grid = Grid(64)
    a = rotation_field(grid)
    data = WaveData(a=a, b=np.zeros_like(a), f=None, h=None, grid=grid)
    for m in (0, 1, 5, 16, 32):
        expected = math.cos(TWO_PI * m * grid.dx) * a
        assert m0(wave_integral(data, m * grid.dx) - expected) < EXACT_TOL


def test_constant_source_gives_quadratic_ramp():
    grid = Grid(64)
    a = np.broadcast_to(np.array([1.0, 0.0]), (64, 2)).copy()
    c = np.array([0.3, -0.2])
    f = np.broadcast_to(c, (13, 64, 2)).copy()
    data = WaveData(a=a, b=np.zeros_like(a), f=f, h=None, grid=grid)
    for m in (1, 4, 12):
        t = m * grid.dx
        assert m0(wave_integral(data, t) - (a + 0.5 * c * t * t)) < EXACT_TOL


def test_x_uniform_characteristic_source_cancels():
    grid = Grid(64)
    a = np.broadcast_to(np.array([1.0, 0.0]), (64, 2)).copy()
    h = np.zeros((13, 64, 2))
    h[:, :, 0] = np.linspace(0.0, 1.0, 13)[:, None]
    data = WaveData(a=a, b=np.zeros_like(a), f=None, h=h, grid=grid)
    for m in range(13):
        assert m0(wave_integral(data, m * grid.dx) - a) < EXACT_TOL


def test_translation_converges_at_second_order():
    errs = []
    for n in (64, 128, 256):
        grid = Grid(n)
        data = translation_data(grid)
        m = n // 4
        errs.append(m0(wave_integral(data, m * grid.dx) - np.roll(data.a, m, axis=0)))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) > ORDER_MIN


def test_integral_time_validation():
    grid = Grid(16)
    data = translation_data(grid)
    with pytest.raises(ValueError):
        wave_integral(data, 0.5 * grid.dx)
    sourced = WaveData(
        a=data.a, b=data.b, f=np.zeros((4, 16, 2)), h=None, grid=grid
    )
    with pytest.raises(ValueError, match="levels 0..3"):
        wave_integral(sourced, 5 * grid.dx)


def test_wave_series_stacks_levels():
    grid = Grid(16)
    data = translation_data(grid)
    series = wave_series(data, 4)
    assert series.shape == (5, 16, 2)
    assert m0(series[0] - data.a) < EXACT_TOL


# ---------------------------------------------------------------------------
# characteristic derivatives


def test_characteristic_derivatives_on_translation_data():
    grid = Grid(64)
    data = translation_data(grid)
    fields = characteristic_derivatives(data, n_levels=8)
    a_x = circ_diff(data.a, grid.dx)
    assert np.max(np.abs(fields.u_plus)) < EXACT_TOL
    for m in range(9):
        assert m0(fields.u_minus[m] - np.roll(2.0 * a_x, m, axis=0)) < EXACT_TOL


def test_linear_in_time_uniform_h_contribution_cancels():
    grid = Grid(64)
    base = translation_data(grid)
    h = np.zeros((9, 64, 2))
    for m in range(9):
        h[m] = m * grid.dx * np.array([0.4, 0.1])
    sourced = WaveData(a=base.a, b=base.b, f=None, h=h, grid=grid)
    fields = characteristic_derivatives(sourced)
    assert np.max(np.abs(fields.u_plus)) < EXACT_TOL


def test_characteristic_derivatives_validation():
    grid = Grid(16)
    data = translation_data(grid)
    with pytest.raises(ValueError, match="n_levels"):
        characteristic_derivatives(data)
    sourced = WaveData(
        a=data.a, b=data.b, f=None, h=np.zeros((2, 16, 2)), grid=grid
    )
    with pytest.raises(ValueError, match="at least 3 levels"):
        characteristic_derivatives(sourced, n_levels=1)
    with pytest.raises(ValueError, match="cover levels"):
        characteristic_derivatives(sourced, n_levels=4)


# ---------------------------------------------------------------------------
# source iteration


def test_picard_contracts_near_the_resting_circle():
    grid = Grid(64)
    xi = rotation_field(grid)
    tangent = np.column_stack([-xi[:, 1], xi[:, 0]])
    state = CurveState(
        gamma=np.zeros((64, 2)), xi=tangent, xi_t=np.zeros((64, 2)), eta=np.zeros((64, 2))
    )
    steps = 8
    theta = np.tile(-tangent, (steps + 1, 1, 1))
    series, report = picard_wave_solve(state, theta, grid, n_levels=steps)
    assert report.converged
    assert report.ratios and max(report.ratios) < 1.0
    deviation = max(m0(series[m] - tangent) for m in range(steps + 1))
    assert deviation < 2e-3


def test_picard_window_validation():
    grid = Grid(16)
    xi = rotation_field(grid)
    state = CurveState(
        gamma=np.zeros((16, 2)), xi=xi, xi_t=np.zeros((16, 2)), eta=np.zeros((16, 2))
    )
    with pytest.raises(ValueError, match="at least 2"):
        picard_wave_solve(state, np.zeros((2, 16, 2)), grid, n_levels=1)
    # a window of k steps spans k + 1 levels of the frozen tension series
    with pytest.raises(ValueError, match="covers 4 levels, window needs 5"):
        picard_wave_solve(state, np.zeros((4, 16, 2)), grid, n_levels=4)


def test_picard_reports_non_contraction():
    grid = Grid(32)
    xi = rotation_field(grid)
    runaway = 40.0 * np.column_stack([-xi[:, 1], xi[:, 0]])
    state = CurveState(
        gamma=np.zeros((32, 2)), xi=xi, xi_t=runaway, eta=np.zeros((32, 2))
    )
    with pytest.raises(NonContractionError):
        picard_wave_solve(state, np.zeros((17, 32, 2)), grid, n_levels=16)


# ---------------------------------------------------------------------------
# leapfrog


def test_leapfrog_transports_translation_data_exactly():
    grid = Grid(32)
    a = rotation_field(grid)
    prev = np.roll(a, -1, axis=0)
    curr = a
    zero = np.zeros_like(a)
    for m in range(1, 9):
        curr, prev = leapfrog_step(prev, curr, zero, zero, grid.dx, grid), curr
        assert m0(curr - np.roll(a, m, axis=0)) < TRANSPORT_TOL


def test_leapfrog_keeps_the_resting_circle():
    grid = Grid(64)
    x = grid.points()
    xi = np.column_stack([-np.sin(TWO_PI * x), np.cos(TWO_PI * x)])
    prev = curr = xi
    zero = np.zeros_like(xi)
    for _ in range(16):
        curr, prev = leapfrog_step(prev, curr, -xi, zero, grid.dx, grid), curr
    assert m0(curr - xi) < EXACT_TOL


def test_leapfrog_rejects_unstable_step():
    grid = Grid(16)
    a = rotation_field(grid)
    with pytest.raises(CflError):
        leapfrog_step(a, a, np.zeros_like(a), np.zeros_like(a), 2.0 * grid.dx, grid)
