import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbbm.grid import GridSpec, line_sobolev_norm


def test_rejects_bad_sizes():
    with pytest.raises(ValueError):
        GridSpec(1.0, 1.0, 7, 8)
    with pytest.raises(ValueError):
        GridSpec(1.0, 1.0, 8, 4)
    with pytest.raises(ValueError):
        GridSpec(-1.0, 1.0, 8, 8)


def test_nodes_and_symbol(small_grid):
    g = small_grid
    assert g.shape == (16, 7)
    np.testing.assert_allclose(np.diff(g.x1), g.L1 / g.N1)
    np.testing.assert_allclose(g.x2, np.arange(1, 8) * g.L2 / 8)
    assert np.all(g.lam >= 0)
    assert np.all(g.lam > 0)  # j >= 1 in every entry
    with pytest.raises(ValueError):
        g.x1[0] = 1.0


def test_dimension_mismatch(small_grid):
    with pytest.raises(ValueError):
        small_grid.forward(np.zeros((16, 8)))
    with pytest.raises(ValueError):
        small_grid.ddx1(np.zeros((15, 7)))


def test_forward_zero(small_grid):
    assert np.all(small_grid.forward(small_grid.zeros()) == 0)


def test_single_sine_coefficient(small_grid):
    g = small_grid
    X1, X2 = g.mesh()
    f = np.sin(np.pi * X2 / g.L2)
    c = g.forward(f)
    # direct inner product with the normalized basis function as oracle
    basis = np.sqrt(2.0 / g.L2) / np.sqrt(g.L1) * np.sin(np.pi * X2 / g.L2)
    expected = np.sum(f * basis) * g.dx1 * g.dx2
    assert abs(c[0, 0] - expected) < 1e-12
    rest = np.abs(c).copy()
    rest[0, 0] = 0
    assert rest.max() < 1e-12


def test_round_trip_and_parseval(mid_grid, rng):
    f = rng.standard_normal(mid_grid.shape)
    c = mid_grid.forward(f)
    assert np.max(np.abs(mid_grid.inverse(c) - f)) <= 1e-12 * np.max(np.abs(f))
    grid_l2 = np.sum(f**2) * mid_grid.dx1 * mid_grid.dx2
    assert abs(np.sum(np.abs(c) ** 2) - grid_l2) <= 1e-12 * grid_l2


def test_ddx1_constant_and_analytic(mid_grid):
    g = mid_grid
    X1, X2 = g.mesh()
    assert np.max(np.abs(g.ddx1(np.sin(np.pi * X2 / g.L2)))) < 1e-13
    k = 2 * np.pi / g.L1
    f = np.cos(k * X1) * np.sin(np.pi * X2 / g.L2)
    exact = -k * np.sin(k * X1) * np.sin(np.pi * X2 / g.L2)
    assert np.max(np.abs(g.ddx1(f) - exact)) < 1e-10


def test_ddx1_fourth_order_fd():
    # smooth periodic field; 4th-order FD error should drop ~16x per refinement
    errs = []
    for n in (32, 64, 128):
        g = GridSpec(2 * np.pi, np.pi, n, 8)
        X1, X2 = g.mesh()
        f = np.exp(np.sin(X1)) * np.sin(X2)
        fd = (-np.roll(f, -2, 0) + 8 * np.roll(f, -1, 0) - 8 * np.roll(f, 1, 0) + np.roll(f, 2, 0)) / (12 * g.dx1)
        errs.append(np.max(np.abs(g.ddx1(f) - fd)))
    assert 12 < errs[0] / errs[1] < 20
    assert 12 < errs[1] / errs[2] < 20


def test_ddx2_analytic(mid_grid):
    g = mid_grid
    X1, X2 = g.mesh()
    q = np.pi / g.L2
    assert np.max(np.abs(g.ddx2_dirichlet(g.zeros()))) == 0
    out = g.ddx2_dirichlet(np.sin(q * X2))
    assert np.max(np.abs(out - q * np.cos(q * X2))) < 1e-10
    walls = g.ddx2_dirichlet(np.sin(q * X2), walls=True)
    assert walls.shape == (g.N1, g.N2 + 1)
    np.testing.assert_allclose(walls[:, 0], q, atol=1e-10)
    np.testing.assert_allclose(walls[:, -1], -q, atol=1e-10)


def test_ddx2_parseval(mid_grid, rng):
    g = mid_grid
    f = g.multiply_symbol(rng.standard_normal(g.shape), (1 + g._lam_half) ** -1.5)
    d = g.ddx2_dirichlet(f, walls=True)
    # trapezoid weights including the walls: exact for cosine series
    w = np.full(g.N2 + 1, g.dx2)
    w[[0, -1]] *= 0.5
    grid_l2 = np.sum(d**2 * w[None, :]) * g.dx1
    j = np.arange(1, g.N2)
    coeff = np.sum((np.pi * j / g.L2) ** 2 * np.abs(g.forward(f)) ** 2)
    assert abs(grid_l2 - coeff) <= 1e-10 * coeff


def test_sobolev_single_mode(mid_grid):
    g = mid_grid
    X1, X2 = g.mesh()
    f = np.sin(np.pi * X2 / g.L2)
    l2 = g.sobolev_norm(f, 0)
    for s in (0.5, 1, 2, 3):
        expected = (1 + (np.pi / g.L2) ** 2) ** (s / 2) * l2
        assert abs(g.sobolev_norm(f, s) - expected) < 1e-12 * expected
    assert g.sobolev_norm(g.zeros(), 2) == 0
    with pytest.raises(ValueError):
        g.sobolev_norm(f, -1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sobolev_monotone(seed):
    g = GridSpec(2 * np.pi, np.pi, 16, 8)
    f = np.random.default_rng(seed).standard_normal(g.shape)
    n0, n1, n2 = (g.sobolev_norm(f, s) for s in (0, 1, 2))
    assert n2 >= n1 >= n0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 5), st.integers(1, 5), st.integers(0, 5), st.integers(1, 5))
def test_derivatives_exact_on_resolved_modes(m1, j1, m2, j2):
    g = GridSpec(2 * np.pi, np.pi, 32, 16)
    X1, X2 = g.mesh()
    f = np.cos(m1 * X1) * np.sin(j1 * X2) + np.sin(m2 * X1) * np.sin(j2 * X2)
    lap = -(m1**2 + j1**2) * np.cos(m1 * X1) * np.sin(j1 * X2) - (m2**2 + j2**2) * np.sin(m2 * X1) * np.sin(j2 * X2)
    assert np.max(np.abs(g.laplacian(f) - lap)) < 1e-11
    d1 = -m1 * np.sin(m1 * X1) * np.sin(j1 * X2) + m2 * np.cos(m2 * X1) * np.sin(j2 * X2)
    assert np.max(np.abs(g.ddx1(f) - d1)) < 1e-12


def test_energy_parts_match_parseval(mid_grid, rng):
    g = mid_grid
    f = g.multiply_symbol(rng.standard_normal(g.shape), (1 + g._lam_half) ** -2.0)
    l2, grad2, lap2 = g.energy_parts(f)
    c2 = np.abs(g.forward(f)) ** 2
    np.testing.assert_allclose([l2, grad2, lap2], [c2.sum(), (g.lam * c2).sum(), (g.lam**2 * c2).sum()], rtol=1e-12)
    np.testing.assert_allclose(g.inner(f, f), l2, rtol=1e-12)


def test_wall_trace_vanishes(mid_grid, rng):
    f = rng.standard_normal(mid_grid.shape)
    bottom, top = mid_grid.wall_trace(f)
    assert np.all(bottom == 0)
    assert np.max(np.abs(top)) < 1e-12 * np.max(np.abs(f)) * mid_grid.N2


def test_line_sobolev_norm(mid_grid):
    g = mid_grid
    k = 2 * np.pi * 3 / g.L1
    a = np.cos(k * g.x1)
    l2 = np.sqrt(np.sum(a**2) * g.dx1)
    np.testing.assert_allclose(line_sobolev_norm(g, a, 2), (1 + k**2) * l2, rtol=1e-12)


def test_dealias_filter(mid_grid):
    g = mid_grid
    X1, X2 = g.mesh()
    low = np.cos(2 * np.pi * X1 / g.L1) * np.sin(np.pi * X2 / g.L2)
    high = np.cos(2 * np.pi * 30 * X1 / g.L1) * np.sin(np.pi * X2 / g.L2)
    np.testing.assert_allclose(g.dealias(low), low, atol=1e-13)
    assert np.max(np.abs(g.dealias(high))) < 1e-13
