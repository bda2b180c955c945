"""
Observables: left/right populations, target yield, ionization, Husimi maps
and Born-Oppenheimer channel analysis of electron-nuclear wave packets.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import GridMismatchError, PhaseContinuityError
from .grid import Grid2D, WaveFunction, expectation


def _z_weights(zgrid):
    """1 for z<0, 0 for z>0 and 1/2 on a cell centred exactly at z=0."""
    z = zgrid.x
    w = (z < 0).astype(float)
    w[np.abs(z) < 1e-9 * zgrid.dx] = 0.5
    return w


def domain_populations(psi: WaveFunction) -> tuple[float, float]:
    """Populations left (z<0) and right (z>0) of the midpoint, including any R."""
    rho = psi.density()
    if isinstance(psi.grid, Grid2D):
        zgrid = psi.grid.z_grid
        rho = rho.sum(axis=1) * psi.grid.r_grid.dx
    else:
        zgrid = psi.grid
    rho = rho * zgrid.dx
    total = rho.sum()
    p_left = float(np.dot(_z_weights(zgrid), rho))
    return p_left, float(total - p_left)


def target_projection(psi: WaveFunction, target: WaveFunction) -> float:
    """|<target|psi>|^2, integrated over R for electron-nuclear states."""
    if isinstance(psi.grid, Grid2D):
        if target.grid != psi.grid.z_grid:
            raise GridMismatchError("target must live on the electronic grid")
        chi = target.amplitudes.conj() @ psi.amplitudes * psi.grid.z_grid.dx
        return float(np.sum(np.abs(chi) ** 2) * psi.grid.r_grid.dx)
    if target.grid != psi.grid:
        raise GridMismatchError("target and state live on different grids")
    return float(abs(np.vdot(target.amplitudes, psi.amplitudes) * psi.grid.dx) ** 2)


def ionization_yield(trace) -> float:
    """Norm lost to the absorbers by the end of the run."""
    return float(1.0 - trace.p_total[-1])


def mean_internuclear_distance(psi: WaveFunction) -> float:
    if not isinstance(psi.grid, Grid2D):
        raise GridMismatchError("<R> needs an electron-nuclear state")
    return expectation(psi, psi.grid.r_grid.x[None, :])


@dataclass
class HusimiMap:
    z: np.ndarray
    p: np.ndarray
    values: np.ndarray  # shape (len(z), len(p))
    sigma: float

    @property
    def dz(self) -> float:
        return float(self.z[1] - self.z[0])

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    def total(self) -> float:
        return float(self.values.sum() * self.dz * self.dp)

    def marginal_z(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dp

    def marginal_p(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.dz

    def mean_p(self) -> float:
        m = self.marginal_p()
        return float(np.dot(m, self.p) / m.sum())

    def to_text(self) -> str:
        lines = [f"# husimi sigma={self.sigma}", "# z[bohr] p[au] H"]
        zz, pp = np.meshgrid(self.z, self.p, indexing="ij")
        for a, b, c in zip(zz.ravel(), pp.ravel(), self.values.ravel()):
            lines.append(f"{a:.10e} {b:.10e} {c:.10e}")
        return "\n".join(lines) + "\n"


def husimi(psi: WaveFunction, sigma: float = 1.0, z_centers=None, p_centers=None) -> HusimiMap:
    """Coherent-state projection ``|<g_{z0,p0}|psi>|^2 / (2 pi)``.

    ``g`` is a normalized Gaussian whose density has standard deviation
    ``sigma``. Defaults: every 4th grid point in z, p in [-3, 3] step 0.05.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if isinstance(psi.grid, Grid2D):
        raise GridMismatchError("husimi maps are computed for electronic (1D) states")
    grid = psi.grid
    z = grid.x
    zc = grid.x[::4] if z_centers is None else np.asarray(z_centers, dtype=float)
    pc = np.arange(-3.0, 3.0 + 1e-12, 0.05) if p_centers is None else np.asarray(p_centers, dtype=float)
    window = np.exp(-((z[None, :] - zc[:, None]) ** 2) / (4 * sigma**2))
    phases = np.exp(-1j * np.outer(z, pc))
    amp = (window * psi.amplitudes[None, :]) @ phases
    amp *= (2 * np.pi * sigma**2) ** -0.25 * grid.dx
    return HusimiMap(zc, pc, np.abs(amp) ** 2 / (2 * np.pi), sigma)


@dataclass
class ElectronicBasis:
    """Adiabatic electronic states ``phi_k(z; R)`` on every R of a 2D grid."""

    grid: Grid2D
    energies: np.ndarray  # (n_R, K)
    states: np.ndarray  # (n_R, n_z, K), normalized with dz
    flagged_r: list


def _match_within_clusters(overlap, energies, tol):
    """Column order that best follows the previous R inside near-degenerate clusters.

    Levels closer than ``tol`` (e.g. a tunneling doublet at large R) have no
    meaningful energy order, so they are matched by overlap instead.
    """
    order = np.arange(len(energies))
    start = 0
    for stop in range(1, len(energies) + 1):
        if stop == len(energies) or energies[stop] - energies[stop - 1] > tol:
            if stop - start > 1:
                sub = np.abs(overlap[start:stop, start:stop])
                _, cols = linear_sum_assignment(-sub)
                order[start:stop] = start + cols
            start = stop
    return order


def electronic_basis(grid: Grid2D, n_states: int, r_window=None, softening: float = 1.0,
                     strict: bool = True, degeneracy_tol: float = 1e-6) -> ElectronicBasis:
    """Diagonalize at every R and align signs so ``phi_k`` varies smoothly in R.

    Signs are fixed by requiring a positive overlap with the previous R.
    Inside clusters of levels closer than ``degeneracy_tol`` hartree the
    states are first matched to the previous R by overlap.
    Where that overlap drops below 1/2 (a level crossing, or the basis is
    not smooth) the R value is flagged; ``strict`` turns flags into a
    :class:`PhaseContinuityError`. ``r_window=(lo, hi)`` restricts the work
    to a range of R; channels outside it are left at zero.
    """
    from .eigensolver import fgh_solve
    from .potentials import soft_core_2d

    zg, rg = grid.z_grid, grid.r_grid
    n_r = rg.n_points
    energies = np.full((n_r, n_states), np.nan)
    states = np.zeros((n_r, zg.n_points, n_states))
    lo, hi = (-np.inf, np.inf) if r_window is None else r_window
    flagged = []
    prev = None
    for i, r in enumerate(rg.x):
        if not lo <= r <= hi:
            prev = None
            continue
        pairs = fgh_solve(zg, soft_core_2d(zg.x, r, 0.0, softening), n_states)
        block = np.column_stack([p.state.amplitudes.real for p in pairs])
        e = np.array([p.energy for p in pairs])
        if prev is not None:
            order = _match_within_clusters(prev.T @ block * zg.dx, e, degeneracy_tol)
            block, e = block[:, order], e[order]
            ov = np.einsum("zk,zk->k", prev, block) * zg.dx
            block = block * np.where(ov < 0, -1.0, 1.0)
            if np.any(np.abs(ov) < 0.5):
                flagged.append(float(r))
        energies[i] = e
        states[i] = block
        prev = block
    if strict and flagged:
        raise PhaseContinuityError(
            f"electronic basis not continuous at {len(flagged)} R values", flagged
        )
    return ElectronicBasis(grid, energies, states, flagged)


@dataclass
class ChannelDecomposition:
    r: np.ndarray
    channels: np.ndarray  # (K, n_R) complex nuclear amplitudes chi_k(R)
    energies: np.ndarray
    dr: float
    basis: ElectronicBasis

    def populations(self) -> np.ndarray:
        return np.sum(np.abs(self.channels) ** 2, axis=1) * self.dr

    def overlap(self, i: int, j: int) -> float:
        """|<chi_i|chi_j>| / (||chi_i|| ||chi_j||) with 0-based channel indices.

        NaN when either channel is empty (norm below 1e-12 of the largest).
        """
        a, b = self.channels[i], self.channels[j]
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        floor = 1e-12 * np.linalg.norm(self.channels, axis=1).max()
        if min(na, nb) <= floor:
            return float("nan")
        return float(abs(np.vdot(a, b)) / (na * nb))

    def resynthesize(self) -> WaveFunction:
        amps = np.einsum("rzk,kr->zr", self.basis.states, self.channels)
        return WaveFunction(amps, self.basis.grid)


def bo_project(psi: WaveFunction, basis: ElectronicBasis) -> ChannelDecomposition:
    """Nuclear channel amplitudes ``chi_k(R) = <phi_k(.;R)|Psi(.,R)>_z``.

    Channel ``k`` is 0-based: the V_3/V_4 pair of the excited doublet is
    ``k = 2, 3``.
    """
    if psi.grid != basis.grid:
        raise GridMismatchError("basis was built for a different grid")
    chi = np.einsum("rzk,zr->kr", basis.states, psi.amplitudes) * psi.grid.z_grid.dx
    return ChannelDecomposition(psi.grid.r_grid.x, chi, basis.energies, psi.grid.r_grid.dx, basis)
