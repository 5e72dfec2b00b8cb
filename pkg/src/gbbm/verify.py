"""A priori estimates checked on computed trajectories.

Area integrals of products of represented fields are grid sums, which equal
coefficient sums exactly (Parseval). Constants that the analysis leaves
implicit are reported as the smallest value that makes the bound hold on the
data (a certified envelope), never compared with a fixed number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .evolve import SimState, rk4_advance, signal_norm
from .grid import GridSpec
from .problem import BoundarySignal, Problem, lifting, make_gtilde


@dataclass
class EnergyReport:
    """Energy time series and identity residuals.

    ``lhs``/``rhs``/``identity_residual`` are defined at interior snapshots
    and NaN at the two ends, where no centered difference exists.
    """

    kind: str
    times: np.ndarray
    E_h1: np.ndarray
    E_h2: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    identity_residual: np.ndarray
    boundary_flux: np.ndarray
    flux_scale: np.ndarray  # ||v||_L2 ||phi(v + h E)||_L2 per snapshot

    def boundary_flux_ok(self, rtol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.boundary_flux) <= rtol * self.flux_scale + 1e-300))

    @property
    def max_residual(self) -> float:
        return float(np.nanmax(self.identity_residual)) if len(self.times) > 2 else 0.0


@dataclass
class DependenceReport:
    epsilons: np.ndarray
    deltas: np.ndarray
    data_distances: np.ndarray
    ratios: np.ndarray  # deltas / data_distances
    ratios_eps: np.ndarray  # deltas / epsilons
    growth_constant: float
    envelope: np.ndarray
    T: float


def _unpack(trajectory: Sequence[SimState]) -> tuple[np.ndarray, list[np.ndarray]]:
    if len(trajectory) < 3:
        raise ValueError(f"need at least 3 snapshots, got {len(trajectory)}")
    times = np.array([s.t for s in trajectory], dtype=float)
    steps = np.diff(times)
    if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
        raise ValueError("snapshots must be uniformly spaced in time")
    return times, [s.v for s in trajectory]


def boundary_flux(problem: Problem, v: np.ndarray, t: float) -> float:
    """Line integral of v phi(v + h E) . n over x2 = 0 and x2 = L2.

    The sine-series trace of v vanishes on both walls, so this is zero up to
    rounding; it is evaluated rather than assumed.
    """
    grid = problem.grid
    vb, vt = grid.wall_trace(v)
    h = problem.signal.h(grid.x1, t)
    _, phi2_b = problem.flux.phi(vb + h)
    _, phi2_t = problem.flux.phi(vt + h * math.exp(-grid.L2))
    return float(np.sum(-vb * phi2_b + vt * phi2_t) * grid.dx1)


def _identity_check(kind: str, trajectory, problem: Problem) -> EnergyReport:
    grid = problem.grid
    times, vs = _unpack(trajectory)
    n = len(times)
    e1 = np.empty(n)
    e2 = np.empty(n)
    bflux = np.empty(n)
    scale = np.empty(n)
    for i, v in enumerate(vs):
        l2, g2, lap2 = grid.energy_parts(v)
        e1[i] = l2 + g2
        e2[i] = g2 + lap2
        bflux[i] = boundary_flux(problem, v, times[i])
        p1, p2 = problem.flux.phi(v + problem.lift(times[i]).hE)
        scale[i] = math.sqrt(l2 * (grid.inner(p1, p1) + grid.inner(p2, p2)))
    energy = e1 if kind == "h1" else e2
    lhs = np.full(n, np.nan)
    rhs = np.full(n, np.nan)
    spacing = times[1] - times[0]
    for i in range(1, n - 1):
        lhs[i] = 0.25 * (energy[i + 1] - energy[i - 1]) / spacing
        F = problem.forcing(vs[i], times[i])
        test = vs[i] if kind == "h1" else -grid.laplacian(vs[i])
        rhs[i] = grid.inner(F, test)
    return EnergyReport(kind, times, e1, e2, lhs, rhs, np.abs(lhs - rhs), bflux, scale)


def h1_identity_check(trajectory: Sequence[SimState], problem: Problem) -> EnergyReport:
    """d/dt (1/2)(||v||^2 + ||grad v||^2) against <F, v>, F = (I - Delta) v_t."""
    return _identity_check("h1", trajectory, problem)


def h2_identity_check(trajectory: Sequence[SimState], problem: Problem) -> EnergyReport:
    """d/dt (1/2)(||grad v||^2 + ||lap v||^2) against <F, -lap v>."""
    return _identity_check("h2", trajectory, problem)


def _envelope(C: float, t: np.ndarray, g_h1: float, h_norm: float) -> np.ndarray:
    base = g_h1**2 + C * t * h_norm**2 * (1.0 + h_norm)
    return np.sqrt(base) * np.exp(C * t * (1.0 + h_norm))


def gronwall_envelope(report: EnergyReport, h_norm: float, g_h1: float | None = None,
                      rtol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Smallest C >= 0 with ||v(t)||_H1 <= (1 + rtol) [g^2 + C t h^2 (1+h)]^{1/2} e^{C t (1+h)}.

    ``h_norm`` is ||h||_{C^1_t H^2}; ``g_h1`` defaults to ||v(0)||_H1. Each
    snapshot gets its own smallest constant by bisection and the fit is their
    maximum, so removing snapshots can only lower it.
    """
    t = report.times - report.times[0]
    values = np.sqrt(report.E_h1)
    if g_h1 is None:
        g_h1 = float(values[0])
    slack = 1.0 + rtol
    worst = 0.0
    for tk, val in zip(t, values):
        if val <= slack * _envelope(0.0, np.array([tk]), g_h1, h_norm)[0]:
            continue
        if tk == 0 or (g_h1 == 0 and h_norm == 0):
            return math.inf, np.full_like(t, math.inf)
        lo, hi = 0.0, 1.0
        while slack * _envelope(hi, np.array([tk]), g_h1, h_norm)[0] < val:
            lo, hi = hi, 2.0 * hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if slack * _envelope(mid, np.array([tk]), g_h1, h_norm)[0] >= val:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-15 * hi:
                break
        worst = max(worst, hi)
    return worst, slack * _envelope(worst, t, g_h1, h_norm)


# ---------------------------------------------------------------------------
# continuous dependence


def lifting_h2_norm(grid: GridSpec, f: np.ndarray) -> float:
    """H^2 size of f(x1) e^{-x2} on the half-plane, weighted like the field norm.

    Uses ||F||^2 + 2||grad F||^2 + ||lap F||^2 with the x2 integrals done
    exactly (int_0^inf e^{-2 x2} dx2 = 1/2) and x1 derivatives spectral.
    """
    f1 = grid.ddx1(f)
    f2 = grid.ddx1(f1)
    l2 = lambda a: float(np.sum(a * a) * grid.dx1)  # noqa: E731
    return math.sqrt(0.5 * (3.0 * l2(f) + 2.0 * l2(f1) + l2(f2 + f)))


def _rk4_path(problem: Problem, v0: np.ndarray, T: float, dt: float, every: int) -> list[SimState]:
    n_total = int(round(T / dt))
    state = SimState(v0, 0.0)
    out = [state]
    done = 0
    while done < n_total:
        n = min(every, n_total - done)
        state = rk4_advance(state, dt, n, problem)
        done += n
        out.append(state)
    return out


def dependence_experiment(problem: Problem, g, dg, dh: BoundarySignal, epsilons: Sequence[float],
                          T: float, dt: float, snapshot_every: int = 1) -> DependenceReport:
    """Distance between solutions for data (g, h) and (g + eps dg, h + eps dh).

    For each eps, Delta(eps) = max over snapshots of ||w||_H2 + ||(h1 - h2) E||_H2
    with w = v1 - v2 the lifted difference. The growth constant is the smallest
    C >= 0 with Delta(eps) <= (||g~1 - g~2||_H2 + ||h1 - h2||_{C^1_t H^2}) e^{C T}.
    """
    eps = np.asarray(epsilons, dtype=float)
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ValueError("epsilons must be positive and strictly decreasing")
    grid = problem.grid
    base_v0, _ = make_gtilde(g, problem.signal, grid)
    base = _rk4_path(problem, base_v0, T, dt, snapshot_every)
    dh_norm = signal_norm(grid, dh, 0.0, T, k=1)

    deltas, dists = [], []
    for e in eps:
        signal = problem.signal + dh.scaled(e)
        pert = problem.with_signal(signal)
        g2 = lambda x1, x2, e=e: g(x1, x2) + e * dg(x1, x2)  # noqa: E731
        v0, _ = make_gtilde(g2, signal, grid)
        path = _rk4_path(pert, v0, T, dt, snapshot_every)
        delta = 0.0
        for s1, s2 in zip(base, path):
            dline = e * dh.h(grid.x1, s1.t)
            d = grid.sobolev_norm(s1.v - s2.v, 2) + (lifting_h2_norm(grid, dline) if np.any(dline) else 0.0)
            delta = max(delta, d)
        deltas.append(delta)
        dists.append(grid.sobolev_norm(base_v0 - v0, 2) + e * dh_norm)

    deltas = np.array(deltas)
    dists = np.array(dists)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(dists > 0, deltas / np.where(dists > 0, dists, 1.0), 0.0)
    C = 0.0
    for d, dist in zip(deltas, dists):
        if d == 0:
            continue
        if dist == 0:
            C = math.inf
            break
        C = max(C, math.log(d / dist) / T if T > 0 else (0.0 if d <= dist else math.inf))
    if math.isfinite(C):
        while np.any(dists * math.exp(C * T) < deltas):
            C = np.nextafter(C, math.inf)
    envelope = dists * math.exp(C * T) if math.isfinite(C) else np.full_like(dists, math.inf)
    return DependenceReport(eps, deltas, dists, ratios, deltas / eps, float(C), envelope, T)


# ---------------------------------------------------------------------------
# convergence studies


def temporal_self_convergence(problem: Problem, v0: np.ndarray, T: float, dts: Sequence[float]):
    """Errors ||v_dt - v_{dt/2}||_H2 at time T and successive reduction factors.

    ``dts`` must be successive halvings; the last entry serves as reference
    for the one before it.
    """
    finals = []
    for dt in dts:
        n = int(round(T / dt))
        if abs(n * dt - T) > 1e-9 * max(T, 1.0):
            raise ValueError(f"T = {T} is not a multiple of dt = {dt}")
        finals.append(rk4_advance(SimState(v0, 0.0), dt, n, problem).v)
    grid = problem.grid
    errors = np.array([grid.sobolev_norm(a - b, 2) for a, b in zip(finals[:-1], finals[1:])])
    factors = errors[:-1] / errors[1:]
    return errors, factors


def truncation_change(problem: Problem, g, T: float, dt: float) -> tuple[float, float, float]:
    """Final ||v||_H2 on [0, L2] and on [0, 2 L2] (same x2 spacing), and their relative change."""
    grid = problem.grid
    big = GridSpec(grid.L1, 2 * grid.L2, grid.N1, 2 * grid.N2)
    out = []
    for gr in (grid, big):
        p = Problem(gr, problem.flux, problem.signal, problem.nu1, problem.dealias)
        v0, _ = make_gtilde(g, p.signal, gr)
        n = int(round(T / dt))
        v = rk4_advance(SimState(v0, 0.0), dt, n, p).v if n else v0
        out.append(gr.sobolev_norm(v, 2))
    a, b = out
    return a, b, abs(a - b) / max(abs(b), 1e-300)


def lifting_fields_consistent(grid: GridSpec, signal: BoundarySignal, t: float) -> float:
    """Max deviation between h_xx E and ddx1(ddx1(h E)) / E."""
    L = lifting(grid, signal, t)
    twice = grid.ddx1(grid.ddx1(L.hE)) / L.E[None, :]
    return float(np.max(np.abs(twice - L.hxxE / L.E[None, :])))
