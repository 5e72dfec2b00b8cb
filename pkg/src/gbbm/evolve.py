"""Time evolution of the lifted field v.

Two integrators share one vector field:

* ``rk4_advance``: classical RK4 method of lines on v_t = rhs(v, t), the
  production path.
* ``picard_window``: fixed-point iteration of the integral form
  v = v(t0) + B h + C v on a short window, with C evaluated by composite
  trapezoid quadrature over iterates stored at uniform time nodes.

``run`` chains either one (or both, for cross-checking) to the final time.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, line_sobolev_norm
from .problem import BoundarySignal, GTildeReport, Problem

log = logging.getLogger(__name__)

# H^2 bound of v -> (I - Delta)^{-1}[(h_xx(t) - h_xx(t0)) e^{-x2}] in terms of
# ||h||_{C_t H^2}: the discrete solver has constant 1 and ||e^{-x2}||_{L2} = 1/sqrt(2),
# and the difference of two times doubles it.
B_CONSTANT = math.sqrt(2.0)


class NumericalError(RuntimeError):
    """Blow-up or non-convergence during time stepping."""


class BlowUpError(NumericalError):
    def __init__(self, step: int, t: float, norm: float, ceiling: float):
        super().__init__(
            f"blow-up guard tripped at step {step} (t={t:.6g}): "
            f"||v||_H2 = {norm:.6g} exceeds ceiling {ceiling:.6g}"
        )
        self.step, self.t, self.norm, self.ceiling = step, t, norm, ceiling


class PicardError(NumericalError):
    def __init__(self, message: str, report: "PicardReport"):
        super().__init__(message)
        self.report = report


@dataclass
class SimState:
    v: np.ndarray = field(repr=False)
    t: float
    step_count: int = 0
    flux_name: str = ""
    nu1: float = 0.0
    dt: float = 0.0


@dataclass
class PicardReport:
    S: float
    R: float
    t0: float
    n_quad: int
    iterates: list[float] = field(default_factory=list)
    converged: bool = False
    reason: str = ""
    times: np.ndarray | None = field(default=None, repr=False)
    trajectory: np.ndarray | None = field(default=None, repr=False)

    def contraction_ratios(self) -> list[float]:
        d = self.iterates
        return [d[i + 1] / d[i] for i in range(len(d) - 1) if d[i] > 0]

    def eventually_decreasing(self) -> bool:
        """Differences decrease monotonically once below the first one."""
        d = self.iterates
        if len(d) < 2:
            return True
        start = next((i for i in range(1, len(d)) if d[i] < d[0]), None)
        if start is None:
            return False
        return all(d[i + 1] <= d[i] for i in range(start, len(d) - 1))


# ---------------------------------------------------------------------------
# RK4


def rk4_step(problem: Problem, v: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One classical RK4 step; ``dt`` may be negative."""
    f = problem.rhs
    k1 = f(v, t)
    k2 = f(v + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(v + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(v + dt * k3, t + dt)
    return v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_advance(state: SimState, dt: float, n_steps: int, problem: Problem,
                ceiling: float = math.inf) -> SimState:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = problem.grid
    v = grid.check(state.v)
    t0 = state.t
    for i in range(n_steps):
        t = t0 + i * dt
        v = rk4_step(problem, v, t, dt)
        step = state.step_count + i + 1
        if not np.all(np.isfinite(v)):
            raise BlowUpError(step, t + dt, math.inf, ceiling)
        if math.isfinite(ceiling):
            norm = grid.sobolev_norm(v, 2)
            if norm > ceiling:
                raise BlowUpError(step, t + dt, norm, ceiling)
    return SimState(v, t0 + n_steps * dt, state.step_count + n_steps,
                    problem.flux.name, problem.nu1, dt)


# ---------------------------------------------------------------------------
# Picard


def signal_norm(grid: GridSpec, signal: BoundarySignal, t_a: float, t_b: float,
                k: int = 1, n_samples: int = 33) -> float:
    """max over sampled t in [t_a, t_b] of sum_{i<=k} ||d^i h/dt^i (t)||_{H^2(x1)}."""
    if signal.is_zero:
        return 0.0
    best = 0.0
    for t in np.linspace(t_a, t_b, n_samples):
        val = line_sobolev_norm(grid, signal.h(grid.x1, t), 2)
        if k >= 1:
            val += line_sobolev_norm(grid, signal.ht(grid.x1, t), 2)
        best = max(best, val)
    return best


def _cth2(grid: GridSpec, traj: np.ndarray) -> float:
    return max(grid.sobolev_norm(v, 2) for v in traj)


def _nonlinear_part(problem: Problem, v: np.ndarray, t: float, lift) -> np.ndarray:
    """Integrand of the C operator (before time integration and sign)."""
    out = -problem.div_flux(v, t, lift)
    if problem.nu1:
        out = out + problem.nu1 * v
    return problem.solver.solve(out)


def c_operator(problem: Problem, traj: np.ndarray, times: np.ndarray, lifts=None) -> np.ndarray:
    """Trapezoid realization of C v on the window nodes.

    nu1 = 0: (C v)(t_k) = -int_{t0}^{t_k} (I - Delta)^{-1} div phi(v + h E) ds.
    nu1 > 0: the exponential-kernel form
             int_{t0}^{t_k} e^{-nu1 (t_k - s)} (I - Delta)^{-1}[nu1 v - div phi] ds.
    """
    if lifts is None:
        lifts = [problem.lift(t) for t in times]
    g = np.stack([_nonlinear_part(problem, v, t, L) for v, t, L in zip(traj, times, lifts)])
    return _kernel_cumtrapz(g, times, problem.nu1)


def _kernel_cumtrapz(g: np.ndarray, times: np.ndarray, nu1: float) -> np.ndarray:
    out = np.zeros_like(g)
    for k in range(1, len(times)):
        h = times[k] - times[k - 1]
        decay = math.exp(-nu1 * h)
        out[k] = decay * out[k - 1] + 0.5 * h * (decay * g[k - 1] + g[k])
    return out


def _base_part(problem: Problem, v0: np.ndarray, times: np.ndarray, lifts) -> np.ndarray:
    """v(t0) + B h: the iterate produced from the zero trajectory."""
    t0 = times[0]
    solve = problem.solver.solve
    if problem.nu1 == 0:
        hxx0 = lifts[0].hxx
        E = lifts[0].E
        base = np.empty((len(times),) + v0.shape)
        for k, L in enumerate(lifts):
            d = L.hxx - hxx0
            base[k] = v0 if not np.any(d) else v0 + solve(d[:, None] * E[None, :])
        return base
    nu1 = problem.nu1
    g = np.stack([solve((L.hxxt + nu1 * (L.hxx + L.h))[:, None] * L.E[None, :]) for L in lifts])
    decay = np.exp(-nu1 * (times - t0))[:, None, None]
    return decay * v0[None] + _kernel_cumtrapz(g, times, nu1)


def picard_window(v0: np.ndarray, problem: Problem, t0: float, S: float, n_quad: int,
                  tol: float = 1e-10, max_iter: int = 60, R: float | None = None
                  ) -> tuple[np.ndarray, PicardReport]:
    """Solve v = v(t0) + B h + C v on [t0, t0 + S] by successive substitution.

    Iterates are trajectories on ``n_quad`` uniform nodes. Raises
    :class:`PicardError` (carrying the report) when the difference sequence
    does not reach ``tol`` within ``max_iter`` or an iterate leaves the ball
    of radius ``R`` in C_t H^2.
    """
    if not S > 0:
        raise ValueError(f"window length must be positive, got {S}")
    if n_quad < 2:
        raise ValueError(f"need at least 2 quadrature nodes, got {n_quad}")
    grid = problem.grid
    v0 = grid.check(v0)
    times = t0 + S * np.arange(n_quad) / (n_quad - 1)
    report = PicardReport(S=S, R=math.inf if R is None else R, t0=t0, n_quad=n_quad, times=times)

    lifts = [problem.lift(t) for t in times]
    base = _base_part(problem, v0, times, lifts)
    traj = base
    for _ in range(max_iter):
        new = base + c_operator(problem, traj, times, lifts)
        if not np.all(np.isfinite(new)):
            report.reason = "non-finite iterate"
            raise PicardError(f"Picard iterate became non-finite (S={S:.4g})", report)
        diff = _cth2(grid, new - traj)
        report.iterates.append(diff)
        traj = new
        if R is not None and _cth2(grid, traj) > R:
            report.reason = "left ball"
            raise PicardError(f"Picard iterate left the ball R={R:.4g} (S={S:.4g})", report)
        if diff <= tol:
            report.converged = True
            report.trajectory = traj
            return traj[-1].copy(), report
    report.reason = "max_iter"
    raise PicardError(
        f"Picard did not converge in {max_iter} iterations (S={S:.4g}, last diff "
        f"{report.iterates[-1]:.3g}); the window is too long for contraction", report)


def random_smooth_field(grid: GridSpec, rng: np.random.Generator, smoothness: float = 2.0) -> np.ndarray:
    """Random field with coefficients ~ N(0, 1) (1 + lambda)^{-smoothness}, unit H^2 norm."""
    noise = rng.standard_normal(grid.shape)
    f = grid.multiply_symbol(noise, (1.0 + grid._lam_half) ** (-smoothness))
    return f / grid.sobolev_norm(f, 2)


def lipschitz_ratio(problem: Problem, v1: np.ndarray, v2: np.ndarray, t: float) -> float:
    """H^2 -> H^2 difference quotient of the C-operator integrand at time t."""
    lift = problem.lift(t)
    a = _nonlinear_part(problem, v1, t, lift)
    b = _nonlinear_part(problem, v2, t, lift)
    grid = problem.grid
    return grid.sobolev_norm(a - b, 2) / grid.sobolev_norm(v1 - v2, 2)


def calibrate_c2(problem: Problem, R: float, t_span: tuple[float, float], n_probes: int = 16,
                 seed: int = 0, rel_step: float = 1e-3, smoothness: float = 2.0) -> float:
    """Empirical constant C2 with Lip(C over window S) ~ C2 * S * (1 + R).

    Probes are random smooth pairs inside the H^2 ball of radius R at random
    times in ``t_span``; the largest observed difference quotient is divided
    by (1 + R).
    """
    rng = np.random.default_rng(seed)
    grid = problem.grid
    best = 0.0
    for _ in range(n_probes):
        base = random_smooth_field(grid, rng, smoothness) * R * rng.uniform()
        delta = random_smooth_field(grid, rng, smoothness) * rel_step * max(R, 1.0)
        t = rng.uniform(*t_span) if t_span[1] > t_span[0] else t_span[0]
        best = max(best, lipschitz_ratio(problem, base + delta, base, t))
    return best / (1.0 + R)


def suggest_window(g_tilde_h2: float, h_norm: float, c2: float, s_max: float,
                   c_b: float = B_CONSTANT) -> float:
    """S = 1 / (2 C2 (1 + 2 C1)) with C1 = ||g~||_H2 + c_B ||h||, capped at ``s_max``."""
    if g_tilde_h2 < 0 or h_norm < 0:
        raise ValueError("norms must be nonnegative")
    c1 = g_tilde_h2 + c_b * h_norm
    if c1 == 0 or c2 <= 0:
        return s_max
    return min(s_max, 1.0 / (2.0 * c2 * (1.0 + 2.0 * c1)))


@dataclass
class PicardSettings:
    tol: float = 1e-10
    max_iter: int = 60
    s_max: float = 1.0
    max_halvings: int = 3
    n_probes: int = 16
    seed: int = 0


def picard_advance(state: SimState, problem: Problem, t_end: float, dt: float, c2: float,
                   settings: PicardSettings, ceiling: float = math.inf):
    """Chain Picard windows from ``state.t`` to ``t_end`` with nodes every ``dt``.

    Returns ``(states, reports)`` where ``states`` holds every node after the
    start, one per ``dt``.
    """
    grid = problem.grid
    n_total = int(round((t_end - state.t) / dt))
    v, step = state.v, state.step_count
    out, reports = [], []
    done = 0
    while done < n_total:
        t0 = state.t + done * dt
        remaining = n_total - done
        v_h2 = grid.sobolev_norm(v, 2)
        h_norm = signal_norm(grid, problem.signal, t0, t0 + min(settings.s_max, remaining * dt), k=0)
        S = suggest_window(v_h2, h_norm, c2, settings.s_max)
        R = 2.0 * (v_h2 + B_CONSTANT * h_norm)
        n_steps = min(remaining, max(1, int(S / dt)))
        for attempt in range(settings.max_halvings + 1):
            try:
                v_end, rep = picard_window(v, problem, t0, n_steps * dt, n_steps + 1,
                                           settings.tol, settings.max_iter, R if R > 0 else None)
                break
            except PicardError as err:
                log.info("Picard window at t=%.6g failed (%s); halving", t0, err.report.reason)
                if attempt == settings.max_halvings or n_steps == 1:
                    raise
                n_steps = max(1, n_steps // 2)
        reports.append(rep)
        for k in range(1, n_steps + 1):
            vk = rep.trajectory[k]
            if math.isfinite(ceiling):
                norm = grid.sobolev_norm(vk, 2)
                if norm > ceiling:
                    raise BlowUpError(step + done + k, t0 + k * dt, norm, ceiling)
            out.append(SimState(vk, state.t + (done + k) * dt, step + done + k,
                                problem.flux.name, problem.nu1, dt))
        v = v_end
        done += n_steps
    return out, reports


# ---------------------------------------------------------------------------
# driver


@dataclass
class RunResult:
    snapshots: list[SimState]
    problem: Problem = field(repr=False)
    gtilde_report: GTildeReport
    picard_reports: list[PicardReport] = field(default_factory=list, repr=False)
    c2: float | None = None
    cross_check: float | None = None  # C_t H^2 distance between the RK4 and Picard paths


def blowup_ceiling(factor: float, gtilde_h2: float, h_norm: float) -> float:
    scale = gtilde_h2 + B_CONSTANT * h_norm
    return factor * scale if scale > 0 else 0.0


def _rk4_snapshots(state: SimState, problem: Problem, n_total: int, dt: float, every: int,
                   ceiling: float) -> list[SimState]:
    snaps = [state]
    done = 0
    while done < n_total:
        n = min(every, n_total - done)
        state = rk4_advance(state, dt, n, problem, ceiling)
        done += n
        snaps.append(state)
    return snaps


def run(config) -> RunResult:
    """Advance the configured problem to ``config.T``.

    ``config`` is a :class:`gbbm.config.RunConfig`.
    """
    from .config import ConfigError, build

    problem, g = build(config)
    grid = problem.grid
    from .problem import make_gtilde

    v0, report = make_gtilde(g, problem.signal, grid)
    if report.far_wall_ratio >= config.far_wall_tol:
        raise ConfigError(
            f"initial data do not decay at x2 = L2: |g~| there is {report.far_wall_ratio:.3g} "
            f"of max|g~| (limit {config.far_wall_tol:g}); increase L2", key="L2")
    if report.wall_mismatch > 0:
        log.warning("g(x1, 0) differs from h(x1, 0) by up to %.3g (not enforced)", report.wall_mismatch)

    dt = config.dt
    n_total = int(round(config.T / dt))
    state = SimState(v0, 0.0, 0, problem.flux.name, problem.nu1, dt)
    h_norm = signal_norm(grid, problem.signal, 0.0, config.T, k=0)
    ceiling = blowup_ceiling(config.blowup_factor, grid.sobolev_norm(v0, 2), h_norm)
    result = RunResult([state], problem, report)
    if n_total == 0:
        return result

    every = config.snapshot_every
    if config.mode in ("rk4", "both"):
        result.snapshots = _rk4_snapshots(state, problem, n_total, dt, every, ceiling)
    if config.mode in ("picard", "both"):
        settings = config.picard_settings()
        r0 = 2.0 * (grid.sobolev_norm(v0, 2) + B_CONSTANT * h_norm)
        c2 = calibrate_c2(problem, r0, (0.0, config.T), settings.n_probes, settings.seed)
        nodes, reports = picard_advance(state, problem, config.T, dt, c2, settings, ceiling)
        result.c2 = c2
        result.picard_reports = reports
        picard_snaps = [state] + [s for s in nodes if s.step_count % every == 0 or s is nodes[-1]]
        if config.mode == "picard":
            result.snapshots = picard_snaps
        else:
            by_step = {s.step_count: s for s in picard_snaps}
            result.cross_check = max(
                grid.sobolev_norm(s.v - by_step[s.step_count].v, 2) for s in result.snapshots
            )
    return result
