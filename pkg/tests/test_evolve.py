import math

import numpy as np
import pytest

from gbbm.evolve import (BlowUpError, PicardError, PicardSettings, SimState, blowup_ceiling,
                         calibrate_c2, lipschitz_ratio, picard_advance, picard_window,
                         random_smooth_field, rk4_advance, signal_norm, suggest_window)
from gbbm.grid import GridSpec
from gbbm.problem import BoundarySignal, GaussianBump, Problem, make_flux, make_gtilde, make_initial


@pytest.fixture
def quad_problem(mid_grid, pulse):
    return Problem(mid_grid, make_flux("quadratic"), pulse)


def test_rk4_zero_data(mid_grid):
    p = Problem(mid_grid, make_flux("bbm"), BoundarySignal())
    s = rk4_advance(SimState(mid_grid.zeros(), 0.0), 0.01, 20, p)
    assert np.all(s.v == 0) and s.step_count == 20 and math.isclose(s.t, 0.2)


def test_rk4_rejects_nonpositive_dt(mid_grid):
    p = Problem(mid_grid, make_flux("bbm"), BoundarySignal())
    with pytest.raises(ValueError):
        rk4_advance(SimState(mid_grid.zeros(), 0.0), 0.0, 1, p)


def test_rk4_fourth_order(bbm_problem, bump):
    v0, _ = make_gtilde(bump, bbm_problem.signal, bbm_problem.grid)
    finals = [rk4_advance(SimState(v0, 0.0), dt, int(round(0.5 / dt)), bbm_problem).v
              for dt in (0.1, 0.05, 0.025)]
    g = bbm_problem.grid
    e1, e2 = g.sobolev_norm(finals[0] - finals[1], 2), g.sobolev_norm(finals[1] - finals[2], 2)
    assert 12 < e1 / e2 < 20


def test_time_reversal(mid_grid, bump):
    from gbbm.evolve import rk4_step
    p = Problem(mid_grid, make_flux("bbm"), BoundarySignal())
    v0, _ = make_gtilde(bump, p.signal, mid_grid)
    dt = 1e-3
    back = rk4_step(p, rk4_step(p, v0, 0.0, dt), dt, -dt)
    assert np.max(np.abs(back - v0)) < 1e-10


def test_linear_mode_is_translation():
    # phi = (a u, 0) with one Fourier x sine mode: v(t) = mode shifted by c t, c = a / (1 + lambda)
    g = GridSpec(2 * np.pi, np.pi, 32, 16)
    a = 1.5
    p = Problem(g, make_flux("linear", (a, 0.0)), BoundarySignal())
    X1, X2 = g.mesh()
    lam = 1.0 + 1.0
    v0 = np.cos(X1) * np.sin(X2)
    T = 0.5
    v = rk4_advance(SimState(v0, 0.0), 0.01, 50, p).v
    exact = np.cos(X1 - a / (1 + lam) * T) * np.sin(X2)
    assert np.max(np.abs(v - exact)) < 1e-9


def test_blowup_guard(mid_grid, bump):
    p = Problem(mid_grid, make_flux("bbm"), BoundarySignal())
    v0, _ = make_gtilde(bump, p.signal, mid_grid)
    with pytest.raises(BlowUpError) as info:
        rk4_advance(SimState(v0, 0.0), 0.01, 5, p, ceiling=0.5 * mid_grid.sobolev_norm(v0, 2))
    assert info.value.step == 1
    assert blowup_ceiling(10.0, 0.0, 0.0) == 0.0
    assert blowup_ceiling(10.0, 1.0, 1.0) == pytest.approx(10 * (1 + math.sqrt(2)))


def test_picard_zero_data(mid_grid):
    p = Problem(mid_grid, make_flux("quadratic"), BoundarySignal())
    v, rep = picard_window(mid_grid.zeros(), p, 0.0, 0.5, 11)
    assert np.all(v == 0) and rep.converged and rep.iterates == [0.0]


def test_picard_linear_geometric_contraction():
    g = GridSpec(2 * np.pi, np.pi, 32, 16)
    p = Problem(g, make_flux("linear", (1.0, 0.0)), BoundarySignal())
    X1, X2 = g.mesh()
    v0 = np.cos(X1) * np.sin(X2)
    _, rep = picard_window(v0, p, 0.0, 0.2, 21, tol=1e-12)
    r = rep.contraction_ratios()
    assert rep.converged and max(r) < 1
    # contraction ratio roughly constant (ratio of ratios near 1 in the asymptotic regime)
    assert max(r[2:-1]) < 2 * min(r[2:-1])


def test_picard_matches_rk4(quad_problem, bump):
    g = quad_problem.grid
    v0, _ = make_gtilde(bump, quad_problem.signal, g)
    S, n = 0.2, 41
    v_p, rep = picard_window(v0, quad_problem, 0.0, S, n, tol=1e-11)
    assert rep.converged and rep.eventually_decreasing()
    v_r = rk4_advance(SimState(v0, 0.0), S / (n - 1), n - 1, quad_problem).v
    # trapezoid quadrature error O(dt^2) dominates
    assert g.sobolev_norm(v_p - v_r, 2) < 1e-4 * g.sobolev_norm(v0, 2)


def test_picard_burgers_kernel_matches_rk4(mid_grid, pulse, bump):
    p = Problem(mid_grid, make_flux("bbm"), pulse, nu1=0.5)
    v0, _ = make_gtilde(bump, pulse, mid_grid)
    errs = []
    for n in (21, 41):
        v_p, rep = picard_window(v0, p, 0.1, 0.2, n, tol=1e-12)
        v_r = rk4_advance(SimState(v0, 0.1), 0.2 / (n - 1), n - 1, p).v
        errs.append(mid_grid.sobolev_norm(v_p - v_r, 2))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_picard_failure_carries_report(quad_problem, bump):
    v0, _ = make_gtilde(bump, quad_problem.signal, quad_problem.grid)
    with pytest.raises(PicardError) as info:
        picard_window(v0, quad_problem, 0.0, 0.2, 11, tol=1e-14, max_iter=2)
    assert info.value.report.reason == "max_iter" and len(info.value.report.iterates) == 2
    with pytest.raises(PicardError) as info:
        picard_window(v0, quad_problem, 0.0, 0.2, 11, R=1e-3)
    assert info.value.report.reason == "left ball"


def test_suggest_window():
    assert suggest_window(0.0, 0.0, 3.0, 0.7) == 0.7
    s1 = suggest_window(1.0, 0.2, 0.5, 100.0)
    s2 = suggest_window(2.0, 0.2, 0.5, 100.0)
    assert s2 < s1
    c1 = 1.0 + math.sqrt(2) * 0.2
    assert s1 == pytest.approx(1 / (2 * 0.5 * (1 + 2 * c1)))
    with pytest.raises(ValueError):
        suggest_window(-1.0, 0.0, 1.0, 1.0)


def test_calibrated_c2_reproduces_fresh_probes(bbm_problem):
    R = 3.0
    c2 = calibrate_c2(bbm_problem, R, (0.0, 1.0), n_probes=16, seed=0)
    rng = np.random.default_rng(99)
    fresh = []
    g = bbm_problem.grid
    for _ in range(16):
        base = random_smooth_field(g, rng) * R * rng.uniform()
        delta = random_smooth_field(g, rng) * 1e-3 * R
        fresh.append(lipschitz_ratio(bbm_problem, base + delta, base, rng.uniform(0, 1)))
    measured = max(fresh)
    assert 0.5 < c2 * (1 + R) / measured < 2.0


def test_random_field_unit_norm(mid_grid, rng):
    f = random_smooth_field(mid_grid, rng)
    assert mid_grid.sobolev_norm(f, 2) == pytest.approx(1.0)


def test_signal_norm(mid_grid, pulse):
    assert signal_norm(mid_grid, BoundarySignal(), 0, 1) == 0
    assert signal_norm(mid_grid, pulse, 0, 1, k=1) > signal_norm(mid_grid, pulse, 0, 1, k=0) > 0


def test_picard_advance_nodes(quad_problem, bump):
    v0, _ = make_gtilde(bump, quad_problem.signal, quad_problem.grid)
    settings = PicardSettings(tol=1e-10, s_max=0.1)
    states, reps = picard_advance(SimState(v0, 0.0), quad_problem, 0.25, 0.01, 0.1, settings)
    assert len(states) == 25 and states[-1].step_count == 25
    assert math.isclose(states[-1].t, 0.25)
    assert all(r.converged for r in reps) and len(reps) == 3
