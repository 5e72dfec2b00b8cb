"""Problem assembly: fluxes, boundary signals, initial data, the lifting
v = u - h(x1, t) e^{-x2}, and the right-hand sides of the lifted equation

    (I - Delta) v_t = nu1 Delta v - div phi(v + h E) + [h_x1x1t + nu1 (h_x1x1 + h)] E

with E(x2) = e^{-x2}. For nu1 = 0 this is the GBBM form; nu1 > 0 adds the
dissipative Burgers term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import GridSpec
from .helmholtz import HelmholtzSolver

Pair = tuple[np.ndarray, np.ndarray]


# ---------------------------------------------------------------------------
# fluxes


@dataclass(frozen=True)
class FluxSpec:
    """Vector flux phi: R -> R^2 with derivatives and antiderivative.

    ``antiderivative`` is Phi with Phi' = phi and Phi(0) = 0.
    ``d2phi_bound`` is the certified sup of |phi''| over the real line
    (max over both components).
    """

    name: str
    params: tuple[float, ...]
    phi: Callable[[np.ndarray], Pair] = field(repr=False, compare=False)
    dphi: Callable[[np.ndarray], Pair] = field(repr=False, compare=False)
    d2phi: Callable[[np.ndarray], Pair] = field(repr=False, compare=False)
    antiderivative: Callable[[np.ndarray], Pair] = field(repr=False, compare=False)
    d2phi_bound: float = 0.0


def _take(name, params, defaults):
    params = tuple(float(p) for p in params)
    if len(params) > len(defaults):
        raise ValueError(f"flux '{name}' takes at most {len(defaults)} parameters, got {len(params)}")
    return params + tuple(defaults[len(params):])


def _zero_like(u):
    return np.zeros_like(np.asarray(u, dtype=float))


def make_flux(name: str, params=()) -> FluxSpec:
    """Build a built-in flux family.

    ============  ==========  ===============================================
    name          params      phi(u)
    ============  ==========  ===============================================
    zero          -           (0, 0)
    linear        a, b        (a u, b u)
    quadratic     c           (c u^2/2, 0)
    bbm           a, c        (a u + c u^2/2, 0)
    oblique       a, c, b     (a u + c u^2/2, b u^2/2)
    saturating    a, s        (a u + s u^3/(1+u^2), 0)
    ============  ==========  ===============================================
    """
    z = _zero_like
    if name == "zero":
        p = _take(name, params, ())
        return FluxSpec(name, p, lambda u: (z(u), z(u)), lambda u: (z(u), z(u)),
                        lambda u: (z(u), z(u)), lambda u: (z(u), z(u)), 0.0)
    if name == "linear":
        a, b = p = _take(name, params, (1.0, 0.0))
        return FluxSpec(
            name, p,
            lambda u: (a * u, b * u),
            lambda u: (a + z(u), b + z(u)),
            lambda u: (z(u), z(u)),
            lambda u: (a * u**2 / 2, b * u**2 / 2),
            0.0,
        )
    if name == "quadratic":
        (c,) = p = _take(name, params, (1.0,))
        return FluxSpec(
            name, p,
            lambda u: (c * u**2 / 2, z(u)),
            lambda u: (c * u, z(u)),
            lambda u: (c + z(u), z(u)),
            lambda u: (c * u**3 / 6, z(u)),
            abs(c),
        )
    if name == "bbm":
        a, c = p = _take(name, params, (1.0, 1.0))
        return FluxSpec(
            name, p,
            lambda u: (a * u + c * u**2 / 2, z(u)),
            lambda u: (a + c * u, z(u)),
            lambda u: (c + z(u), z(u)),
            lambda u: (a * u**2 / 2 + c * u**3 / 6, z(u)),
            abs(c),
        )
    if name == "oblique":
        a, c, b = p = _take(name, params, (1.0, 1.0, 1.0))
        return FluxSpec(
            name, p,
            lambda u: (a * u + c * u**2 / 2, b * u**2 / 2),
            lambda u: (a + c * u, b * u),
            lambda u: (c + z(u), b + z(u)),
            lambda u: (a * u**2 / 2 + c * u**3 / 6, b * u**3 / 6),
            max(abs(c), abs(b)),
        )
    if name == "saturating":
        a, s = p = _take(name, params, (1.0, 1.0))
        # u^3/(1+u^2) has |second derivative| maximal at u = sqrt(2) - 1
        us = math.sqrt(2.0) - 1.0
        bound = abs(s) * abs(6 * us - 2 * us**3) / (1 + us**2) ** 3
        return FluxSpec(
            name, p,
            lambda u: (a * u + s * u**3 / (1 + u**2), z(u)),
            lambda u: (a + s * (1 - (1 - u**2) / (1 + u**2) ** 2), z(u)),
            lambda u: (s * (6 * u - 2 * u**3) / (1 + u**2) ** 3, z(u)),
            lambda u: (a * u**2 / 2 + s * (u**2 - np.log1p(u**2)) / 2, z(u)),
            bound,
        )
    raise ValueError(f"unknown flux family '{name}'")


# ---------------------------------------------------------------------------
# boundary signals


@dataclass(frozen=True)
class Pulse:
    """a * exp(-(x1 - c)^2 / sigma^2) * sin(omega t + phase)."""

    amplitude: float
    center: float
    width: float
    omega: float
    phase: float = 0.0

    def envelope(self, x1):
        return self.amplitude * np.exp(-((np.asarray(x1) - self.center) / self.width) ** 2)

    def h(self, x1, t):
        return self.envelope(x1) * math.sin(self.omega * t + self.phase)

    def ht(self, x1, t):
        return self.envelope(x1) * self.omega * math.cos(self.omega * t + self.phase)

    def hxx(self, x1, t):
        y = (np.asarray(x1) - self.center) / self.width
        return self.h(x1, t) * (4 * y**2 - 2) / self.width**2


@dataclass(frozen=True)
class BoundarySignal:
    """Wavemaker datum h(x1, t) as a sum of Gaussian pulses (empty sum = zero)."""

    pulses: tuple[Pulse, ...] = ()

    @property
    def is_zero(self) -> bool:
        return all(p.amplitude == 0 for p in self.pulses)

    def h(self, x1, t):
        out = np.zeros_like(np.asarray(x1, dtype=float))
        for p in self.pulses:
            out = out + p.h(x1, t)
        return out

    def ht(self, x1, t):
        out = np.zeros_like(np.asarray(x1, dtype=float))
        for p in self.pulses:
            out = out + p.ht(x1, t)
        return out

    def hxx(self, x1, t):
        """Closed-form second x1 derivative (the simulator uses spectral ones)."""
        out = np.zeros_like(np.asarray(x1, dtype=float))
        for p in self.pulses:
            out = out + p.hxx(x1, t)
        return out

    def scaled(self, eps: float) -> "BoundarySignal":
        return BoundarySignal(tuple(
            Pulse(eps * p.amplitude, p.center, p.width, p.omega, p.phase) for p in self.pulses
        ))

    def __add__(self, other: "BoundarySignal") -> "BoundarySignal":
        return BoundarySignal(self.pulses + other.pulses)

    def seam_ratio(self, grid: GridSpec) -> float:
        """Largest pulse envelope at the x1 seam relative to its amplitude."""
        worst = 0.0
        for p in self.pulses:
            if p.amplitude == 0:
                continue
            seam = max(abs(p.envelope(0.0)), abs(p.envelope(grid.L1)))
            worst = max(worst, float(seam / abs(p.amplitude)))
        return worst


def make_signal(name: str, params=()) -> BoundarySignal:
    """``zero`` or ``pulse`` with groups of (a, c, sigma, omega[, phase])."""
    if name == "zero":
        if len(params):
            raise ValueError("signal 'zero' takes no parameters")
        return BoundarySignal()
    if name == "pulse":
        groups = [tuple(float(x) for x in g) for g in params]
        if not groups:
            raise ValueError("signal 'pulse' needs at least one (a, c, sigma, omega[, phase]) group")
        pulses = []
        for g in groups:
            if len(g) not in (4, 5):
                raise ValueError(f"pulse group needs 4 or 5 values, got {len(g)}")
            if g[2] <= 0:
                raise ValueError(f"pulse width must be positive, got {g[2]}")
            pulses.append(Pulse(*g))
        return BoundarySignal(tuple(pulses))
    raise ValueError(f"unknown signal family '{name}'")


# ---------------------------------------------------------------------------
# initial data


@dataclass(frozen=True)
class GaussianBump:
    amplitude: float
    c1: float
    c2: float
    width: float

    def __call__(self, x1, x2):
        r2 = (np.asarray(x1) - self.c1) ** 2 + (np.asarray(x2) - self.c2) ** 2
        return self.amplitude * np.exp(-r2 / self.width**2)


@dataclass(frozen=True)
class SineMode:
    """a * cos(2 pi m x1 / L1) * sin(pi j x2 / L2)."""

    amplitude: float
    m: int
    j: int
    L1: float
    L2: float

    def __call__(self, x1, x2):
        return (self.amplitude * np.cos(2 * np.pi * self.m * np.asarray(x1) / self.L1)
                * np.sin(np.pi * self.j * np.asarray(x2) / self.L2))


@dataclass(frozen=True)
class ZeroData:
    def __call__(self, x1, x2):
        return np.zeros(np.broadcast(np.asarray(x1), np.asarray(x2)).shape)


def make_initial(name: str, params, grid: GridSpec):
    params = tuple(float(p) for p in params)
    if name == "zero":
        if params:
            raise ValueError("initial data 'zero' takes no parameters")
        return ZeroData()
    if name == "gaussian":
        if len(params) != 4:
            raise ValueError("initial data 'gaussian' needs (a, c1, c2, sigma)")
        if params[3] <= 0:
            raise ValueError(f"gaussian width must be positive, got {params[3]}")
        return GaussianBump(*params)
    if name == "mode":
        if len(params) != 3:
            raise ValueError("initial data 'mode' needs (a, m, j)")
        a, m, j = params
        if m != int(m) or j != int(j) or j < 1 or m < 0:
            raise ValueError(f"mode indices must be integers m >= 0, j >= 1, got {m}, {j}")
        return SineMode(a, int(m), int(j), grid.L1, grid.L2)
    raise ValueError(f"unknown initial data family '{name}'")


# ---------------------------------------------------------------------------
# lifting


@dataclass(frozen=True)
class LiftingFields:
    """Lifting profile and h-products at one time.

    Line arrays have shape ``(N1,)``; products with E are fields.
    x1 derivatives of h are spectral.
    """

    t: float
    E: np.ndarray
    h: np.ndarray
    hxx: np.ndarray
    ht: np.ndarray
    hxxt: np.ndarray

    @property
    def hE(self):
        return self.h[:, None] * self.E[None, :]

    @property
    def hxxE(self):
        return self.hxx[:, None] * self.E[None, :]

    @property
    def htE(self):
        return self.ht[:, None] * self.E[None, :]

    @property
    def hxxtE(self):
        return self.hxxt[:, None] * self.E[None, :]


def lifting(grid: GridSpec, signal: BoundarySignal, t: float) -> LiftingFields:
    E = np.exp(-grid.x2)
    if signal.is_zero:
        zero = np.zeros(grid.N1)
        return LiftingFields(t, E, zero, zero, zero, zero)
    h = signal.h(grid.x1, t)
    ht = signal.ht(grid.x1, t)
    hxx = grid.ddx1(grid.ddx1(h))
    hxxt = grid.ddx1(grid.ddx1(ht))
    return LiftingFields(t, E, h, hxx, ht, hxxt)


@dataclass(frozen=True)
class GTildeReport:
    """Diagnostics from forming the lifted initial datum.

    ``wall_mismatch``: max |g(x1, 0) - h(x1, 0)| (corner compatibility).
    ``far_wall``: max |g~| at x2 = L2, dropped by the Dirichlet representation.
    ``far_wall_ratio``: ``far_wall / max|g~|`` (0 when g~ vanishes).
    """

    wall_mismatch: float
    far_wall: float
    far_wall_ratio: float


def make_gtilde(g, signal: BoundarySignal, grid: GridSpec) -> tuple[np.ndarray, GTildeReport]:
    """g~ = g - h(x1, 0) e^{-x2} on the interior nodes, plus wall diagnostics."""
    X1, X2 = grid.mesh(walls=True)
    gw = np.broadcast_to(np.asarray(g(X1, X2), dtype=float), X1.shape)
    if not np.all(np.isfinite(gw)):
        raise ValueError("initial data produced non-finite samples")
    h0 = signal.h(grid.x1, 0.0)
    if not np.all(np.isfinite(h0)):
        raise ValueError("boundary signal produced non-finite samples at t = 0")
    full = gw - h0[:, None] * np.exp(-X2)
    peak = float(np.max(np.abs(full)))
    top = float(np.max(np.abs(full[:, -1])))
    report = GTildeReport(
        wall_mismatch=float(np.max(np.abs(full[:, 0]))),
        far_wall=top,
        far_wall_ratio=top / peak if peak > 0 else 0.0,
    )
    return np.ascontiguousarray(full[:, 1:-1]), report


# ---------------------------------------------------------------------------
# right-hand sides


def div_flux(v, signal: BoundarySignal, t: float, flux: FluxSpec, grid: GridSpec,
             dealias: bool = False, lift: LiftingFields | None = None) -> np.ndarray:
    """div phi(w) = phi1'(w) w_x1 + phi2'(w) w_x2 with w = v + h E."""
    v = grid.check(v)
    if lift is None:
        lift = lifting(grid, signal, t)
    hE = lift.hE
    w = v + hE
    w1 = grid.ddx1(w)
    # d/dx2 (h e^{-x2}) = -h e^{-x2}
    w2 = grid.ddx2_dirichlet(v) - hE
    d1, d2 = flux.dphi(w)
    out = d1 * w1 + d2 * w2
    if dealias:
        out = grid.dealias(out)
    return out


def rhs_gbbm(v, signal: BoundarySignal, t: float, flux: FluxSpec, solver: HelmholtzSolver,
             dealias: bool = False) -> np.ndarray:
    """v_t = (I - Delta)^{-1} [h_x1x1t E - div phi(v + h E)]."""
    grid = solver.grid
    lift = lifting(grid, signal, t)
    return solver.solve(lift.hxxtE - div_flux(v, signal, t, flux, grid, dealias, lift))


def rhs_burgers(v, signal: BoundarySignal, t: float, flux: FluxSpec, nu1: float,
                solver: HelmholtzSolver, dealias: bool = False) -> np.ndarray:
    """v_t = (I - Delta)^{-1} [nu1 Delta v - div phi(v + h E) + h~ E],
    h~ = h_x1x1t + nu1 (h_x1x1 + h)."""
    if nu1 < 0:
        raise ValueError(f"nu1 must be nonnegative, got {nu1}")
    if nu1 == 0:
        return rhs_gbbm(v, signal, t, flux, solver, dealias)
    return solver.solve(forcing(v, signal, t, flux, nu1, solver.grid, dealias))


def forcing(v, signal: BoundarySignal, t: float, flux: FluxSpec, nu1: float, grid: GridSpec,
            dealias: bool = False, lift: LiftingFields | None = None) -> np.ndarray:
    """The right side F of (I - Delta) v_t = F."""
    if lift is None:
        lift = lifting(grid, signal, t)
    out = lift.hxxtE - div_flux(v, signal, t, flux, grid, dealias, lift)
    if nu1:
        htilde = nu1 * (lift.hxx + lift.h)
        out = out + nu1 * grid.laplacian(v) + htilde[:, None] * lift.E[None, :]
    return out


@dataclass(frozen=True)
class Problem:
    """A fully specified lifted problem: grid, flux, signal, viscosity."""

    grid: GridSpec
    flux: FluxSpec
    signal: BoundarySignal
    nu1: float = 0.0
    dealias: bool = False
    solver: HelmholtzSolver = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.nu1 < 0:
            raise ValueError(f"nu1 must be nonnegative, got {self.nu1}")
        object.__setattr__(self, "solver", HelmholtzSolver(self.grid))

    def lift(self, t: float) -> LiftingFields:
        return lifting(self.grid, self.signal, t)

    def div_flux(self, v, t: float, lift=None):
        return div_flux(v, self.signal, t, self.flux, self.grid, self.dealias, lift)

    def forcing(self, v, t: float, lift=None):
        return forcing(v, self.signal, t, self.flux, self.nu1, self.grid, self.dealias, lift)

    def rhs(self, v, t: float):
        if self.nu1 == 0:
            return rhs_gbbm(v, self.signal, t, self.flux, self.solver, self.dealias)
        return rhs_burgers(v, self.signal, t, self.flux, self.nu1, self.solver, self.dealias)

    def reconstruct(self, v, t: float):
        """u = v + h(x1, t) e^{-x2} on the interior nodes."""
        return v + self.lift(t).hE

    def with_signal(self, signal: BoundarySignal) -> "Problem":
        return Problem(self.grid, self.flux, signal, self.nu1, self.dealias)
