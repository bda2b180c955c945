"""
Uniform spatial grids, wavefunction storage and Fourier utilities.

Everything is in Hartree atomic units. Momentum grids use the standard FFT
("wrap-around") ordering returned by :func:`numpy.fft.fftfreq`: index 0 is
k = 0, positive momenta follow, and the second half holds the negative
momenta. Every module that needs a momentum grid takes it from
:attr:`Grid1D.k` so there is one source of truth for that ordering.

Integrals are plain sums times the cell volume. The grids are periodic, so
no end corrections are applied.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import GridError, GridMismatchError, UndefinedExpectationError

AU_TIME_FS = 0.02418884
HARTREE_EV = 27.2114
PROTON_MASS = 1836.15267


def fs_to_au(t_fs):
    return t_fs / AU_TIME_FS


def au_to_fs(t_au):
    return t_au * AU_TIME_FS


@dataclass(frozen=True)
class Grid1D:
    """Periodic uniform grid ``x_j = x_min + j*dx`` for ``j < n_points``.

    The point ``x_max`` itself is excluded since it coincides with ``x_min``
    under the periodic boundary.
    """

    n_points: int
    x_min: float
    x_max: float

    def __post_init__(self):
        n = self.n_points
        if n < 2 or n & (n - 1):
            raise GridError(f"n_points must be a power of two, got {n}")
        if not self.x_max > self.x_min:
            raise GridError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @cached_property
    def k(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n_points, self.dx)

    @property
    def dk(self) -> float:
        return 2 * np.pi / (self.n_points * self.dx)

    @property
    def shape(self) -> tuple[int]:
        return (self.n_points,)

    @property
    def cell_volume(self) -> float:
        return self.dx

    def describe(self) -> dict:
        return {"n_points": self.n_points, "x_min": self.x_min, "x_max": self.x_max}


@dataclass(frozen=True)
class Grid2D:
    """Product grid for the electron (axis 0) and internuclear (axis 1) coordinates."""

    z_grid: Grid1D
    r_grid: Grid1D

    def __post_init__(self):
        if self.r_grid.x_min <= 0:
            raise GridError(f"internuclear grid must start at R > 0, got {self.r_grid.x_min}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.z_grid.n_points, self.r_grid.n_points)

    @property
    def cell_volume(self) -> float:
        return self.z_grid.dx * self.r_grid.dx

    @property
    def axes(self) -> tuple[Grid1D, Grid1D]:
        return (self.z_grid, self.r_grid)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.z_grid.x, self.r_grid.x, indexing="ij")


class WaveFunction:
    """Complex amplitudes attached to a :class:`Grid1D` or :class:`Grid2D`."""

    def __init__(self, amplitudes, grid):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != grid.shape:
            raise GridMismatchError(
                f"amplitude shape {amplitudes.shape} does not match grid shape {grid.shape}"
            )
        self.amplitudes = amplitudes
        self.grid = grid

    @property
    def ndim(self) -> int:
        return len(self.grid.shape)

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real * self.grid.cell_volume)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def normalized(self) -> "WaveFunction":
        n2 = self.norm2()
        if n2 == 0:
            raise UndefinedExpectationError("cannot normalize a zero state")
        return WaveFunction(self.amplitudes / np.sqrt(n2), self.grid)

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.amplitudes.copy(), self.grid)

    def __repr__(self):
        return f"WaveFunction(shape={self.grid.shape}, norm2={self.norm2():.6g})"


def _check_same_grid(a: WaveFunction, b: WaveFunction):
    if a.grid != b.grid:
        raise GridMismatchError("wavefunctions live on different grids")


def inner_product(a: WaveFunction, b: WaveFunction) -> complex:
    """<a|b>, antilinear in ``a``."""
    _check_same_grid(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.grid.cell_volume)


def expectation(psi: WaveFunction, f) -> float:
    """<psi|f|psi> / <psi|psi> for a real multiplicative function ``f``.

    ``f`` may be an array broadcastable to the grid or a scalar.
    """
    rho = psi.density()
    norm = rho.sum()
    if norm == 0:
        raise UndefinedExpectationError("expectation of a zero-norm state")
    return float(np.sum(rho * f) / norm)


def fourier_forward(psi: WaveFunction) -> np.ndarray:
    """Momentum amplitudes on the FFT-ordered k grid(s).

    Normalized as the continuous transform
    ``phi(k) = (2 pi)^(-1/2) * integral psi(x) exp(-i k x) dx`` so that
    ``sum |phi|^2 dk == sum |psi|^2 dx``.
    """
    out = psi.amplitudes
    for axis, g in enumerate(psi.grid.axes if psi.ndim == 2 else (psi.grid,)):
        phase = np.exp(-1j * g.k * g.x_min) * g.dx / np.sqrt(2 * np.pi)
        out = sfft.fft(out, axis=axis) * _along(phase, axis, psi.ndim)
    return out


def fourier_inverse(phi: np.ndarray, grid) -> WaveFunction:
    """Inverse of :func:`fourier_forward`."""
    out = np.asarray(phi, dtype=complex)
    axes = grid.axes if len(grid.shape) == 2 else (grid,)
    for axis, g in enumerate(axes):
        phase = np.exp(1j * g.k * g.x_min) * np.sqrt(2 * np.pi) / g.dx
        out = sfft.ifft(out * _along(phase, axis, len(axes)), axis=axis)
    return WaveFunction(out, grid)


def _along(v, axis, ndim):
    shape = [1] * ndim
    shape[axis] = -1
    return v.reshape(shape)


def momentum_expectation(psi: WaveFunction, axis: int = 0) -> float:
    """<p> along ``axis`` evaluated in momentum space."""
    phi = fourier_forward(psi)
    g = psi.grid.axes[axis] if psi.ndim == 2 else psi.grid
    return expectation(WaveFunction(phi, psi.grid), _along(g.k, axis, psi.ndim))


def gaussian(grid: Grid1D, center: float, sigma: float, k0: float = 0.0) -> WaveFunction:
    """Normalized Gaussian ``exp(-(x-x0)^2/(4 sigma^2) + i k0 x)``; ``sigma`` is the density std."""
    x = grid.x
    amp = (2 * np.pi * sigma**2) ** -0.25 * np.exp(-((x - center) ** 2) / (4 * sigma**2) + 1j * k0 * x)
    return WaveFunction(amp, grid)
