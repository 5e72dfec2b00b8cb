"""Tensor grid on the truncated half-plane [0, L1) x [0, L2].

x1 is periodic (Fourier), x2 carries homogeneous Dirichlet walls at 0 and L2
(sine series, DST-I). Fields live on the interior x2 nodes only and are plain
float64 arrays of shape ``(N1, N2 - 1)``.

Spectral coefficients returned by :meth:`GridSpec.forward` are scaled by
``sqrt(dx1 * dx2)`` so that coefficient sums of squares equal the grid
quadrature of the field squared (Parseval with physical weights).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft


@dataclass(frozen=True)
class GridSpec:
    L1: float
    L2: float
    N1: int
    N2: int

    # derived tables, filled in __post_init__
    x1: np.ndarray = field(init=False, repr=False, compare=False)
    x2: np.ndarray = field(init=False, repr=False, compare=False)
    x2_walls: np.ndarray = field(init=False, repr=False, compare=False)
    lam: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.L1 > 0 and self.L2 > 0):
            raise ValueError(f"L1, L2 must be positive, got {self.L1}, {self.L2}")
        if int(self.N1) != self.N1 or self.N1 < 8 or self.N1 % 2:
            raise ValueError(f"N1 must be an even integer >= 8, got {self.N1}")
        if int(self.N2) != self.N2 or self.N2 < 8:
            raise ValueError(f"N2 must be an integer >= 8, got {self.N2}")
        object.__setattr__(self, "N1", int(self.N1))
        object.__setattr__(self, "N2", int(self.N2))
        object.__setattr__(self, "L1", float(self.L1))
        object.__setattr__(self, "L2", float(self.L2))

        n1, n2 = self.N1, self.N2
        m_full = np.fft.fftfreq(n1, d=1.0 / n1)  # integers, Nyquist negative
        m_half = np.arange(n1 // 2 + 1, dtype=float)
        j = np.arange(1, n2, dtype=float)
        k_full = 2 * np.pi * m_full / self.L1
        k_half = 2 * np.pi * m_half / self.L1
        q = np.pi * j / self.L2
        k_odd = k_half.copy()
        k_odd[-1] = 0.0  # Nyquist mode has no real first derivative

        tables = {
            "x1": self.L1 * np.arange(n1) / n1,
            "x2": self.L2 * j / n2,
            "x2_walls": self.L2 * np.arange(n2 + 1) / n2,
            "lam": k_full[:, None] ** 2 + q[None, :] ** 2,
            "_k_half": k_half,
            "_k_odd": k_odd,
            "_q": q,
            "_lam_half": k_half[:, None] ** 2 + q[None, :] ** 2,
            "_dealias": (m_half[:, None] < n1 / 3.0) & (j[None, :] < 2.0 * n2 / 3.0),
        }
        for name, arr in tables.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # -- geometry ---------------------------------------------------------
    @property
    def dx1(self) -> float:
        return self.L1 / self.N1

    @property
    def dx2(self) -> float:
        return self.L2 / self.N2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N1, self.N2 - 1)

    def mesh(self, walls: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X1, X2)`` with ``indexing='ij'``; ``walls`` adds x2 = 0 and L2."""
        x2 = self.x2_walls if walls else self.x2
        return np.meshgrid(self.x1, x2, indexing="ij")

    def check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {self.shape}")
        return f

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    # -- transforms -------------------------------------------------------
    def forward(self, f: np.ndarray) -> np.ndarray:
        """Coefficients on e^{2 pi i m x1/L1} sin(pi j x2/L2), fft order in m."""
        f = self.check(f)
        c = sfft.fft(sfft.dst(f, type=1, axis=1, norm="ortho"), axis=0, norm="ortho")
        return c * np.sqrt(self.dx1 * self.dx2)

    def inverse(self, c: np.ndarray) -> np.ndarray:
        c = np.asarray(c)
        if c.shape != self.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match grid {self.shape}")
        f = sfft.ifft(c / np.sqrt(self.dx1 * self.dx2), axis=0, norm="ortho").real
        return sfft.dst(f, type=1, axis=1, norm="ortho")

    # half-spectrum (rfft in x1) representation used by the hot paths
    def _spec(self, f: np.ndarray) -> np.ndarray:
        return sfft.rfft(sfft.dst(f, type=1, axis=1, norm="ortho"), axis=0)

    def _phys(self, c: np.ndarray) -> np.ndarray:
        return sfft.dst(sfft.irfft(c, n=self.N1, axis=0), type=1, axis=1, norm="ortho")

    def multiply_symbol(self, f: np.ndarray, symbol: np.ndarray) -> np.ndarray:
        """Apply a real symbol given on the half-spectrum layout ``(N1//2+1, N2-1)``."""
        return self._phys(self._spec(self.check(f)) * symbol)

    # -- derivatives ------------------------------------------------------
    def ddx1(self, f: np.ndarray) -> np.ndarray:
        """Spectral d/dx1 of a field or of an x1 line (shape ``(N1,)``)."""
        f = np.asarray(f)
        if f.ndim == 1:
            if f.shape != (self.N1,):
                raise ValueError(f"line shape {f.shape} does not match N1={self.N1}")
            k = self._k_odd
        else:
            self.check(f)
            k = self._k_odd[:, None]
        return sfft.irfft(1j * k * sfft.rfft(f, axis=0), n=self.N1, axis=0)

    def ddx2_dirichlet(self, f: np.ndarray, walls: bool = False) -> np.ndarray:
        """Term-by-term x2 derivative of the sine series (sine -> cosine).

        With ``walls=True`` the result includes x2 = 0 and x2 = L2, shape
        ``(N1, N2 + 1)``; otherwise only the interior nodes are returned.
        """
        f = self.check(f)
        a = sfft.dst(f, type=1, axis=1, norm="ortho") * self._q
        b = np.zeros((self.N1, self.N2 + 1))
        b[:, 1:-1] = a
        d = sfft.dct(b, type=1, axis=1) / np.sqrt(2.0 * self.N2)
        return d if walls else d[:, 1:-1]

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        return self.multiply_symbol(f, -self._lam_half)

    def dealias(self, f: np.ndarray) -> np.ndarray:
        """2/3-rule filter: drop |m| >= N1/3 and j >= 2 N2/3."""
        return self.multiply_symbol(f, self._dealias)

    def wall_trace(self, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate the sine series of ``f`` at x2 = 0 and x2 = L2."""
        a = sfft.dst(self.check(f), type=1, axis=1, norm="ortho")
        j = np.arange(1, self.N2)
        scale = np.sqrt(2.0 / self.N2)
        bottom = scale * a @ np.sin(np.pi * j * 0.0)
        top = scale * a @ np.sin(np.pi * j * self.L2 / self.L2)
        return bottom, top

    # -- norms and inner products ----------------------------------------
    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """Grid quadrature of f*g over the interior nodes."""
        return float(np.sum(self.check(f) * self.check(g)) * self.dx1 * self.dx2)

    def sobolev_norm(self, f: np.ndarray, s: float) -> float:
        if s < 0:
            raise ValueError(f"Sobolev index must be nonnegative, got {s}")
        c = self.forward(f)
        return float(np.sqrt(np.sum((1.0 + self.lam) ** s * np.abs(c) ** 2)))

    def energy_parts(self, f: np.ndarray) -> tuple[float, float, float]:
        """Return ``(||f||^2, ||grad f||^2, ||lap f||^2)`` from the coefficients."""
        p = np.abs(self.forward(f)) ** 2
        return float(p.sum()), float((self.lam * p).sum()), float((self.lam**2 * p).sum())


def line_sobolev_norm(grid: GridSpec, a: np.ndarray, s: float) -> float:
    """H^s norm on the periodic x1 line with symbol (1 + k^2)^s."""
    if s < 0:
        raise ValueError(f"Sobolev index must be nonnegative, got {s}")
    a = np.asarray(a, dtype=float)
    if a.shape != (grid.N1,):
        raise ValueError(f"line shape {a.shape} does not match N1={grid.N1}")
    c = sfft.fft(a, norm="ortho") * np.sqrt(grid.dx1)
    k = 2 * np.pi * np.fft.fftfreq(grid.N1, d=grid.L1 / grid.N1)
    return float(np.sqrt(np.sum((1.0 + k**2) ** s * np.abs(c) ** 2)))
