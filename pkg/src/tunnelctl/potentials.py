"""
Soft-core Coulomb model of one electron and two protons.

    V(z, R) = -1/sqrt(s + (z - R/2)^2) - 1/sqrt(s + (z + R/2)^2) + 1/R + z*E_dc

with softening ``s = 1``. The nuclear repulsion 1/R is kept in the 1D
fixed-nuclei model too, so 1D energies line up with the 2D surfaces.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateGeometryError, GridError
from .grid import Grid1D


@dataclass(frozen=True)
class PotentialModel:
    """Fixed-nuclei parameters.

    ``softening`` is an expert override; every reference value assumes 1.
    """

    R: float
    e_dc: float = 0.0
    softening: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise GridError(f"internuclear distance must be positive, got {self.R}")
        if not self.softening > 0:
            raise GridError(f"softening must be positive, got {self.softening}")

    def __call__(self, z):
        return soft_core_1d(z, self)

    def with_tilt(self, e_dc: float) -> "PotentialModel":
        return PotentialModel(self.R, e_dc, self.softening)


def soft_core_2d(z, R, e_dc=0.0, softening=1.0):
    """Potential on the (z, R) plane; arrays broadcast against each other."""
    R = np.asarray(R, dtype=float)
    if np.any(R <= 0):
        raise GridError("soft-core potential needs R > 0 everywhere")
    z = np.asarray(z, dtype=float)
    return (
        -1.0 / np.sqrt(softening + (z - R / 2) ** 2)
        - 1.0 / np.sqrt(softening + (z + R / 2) ** 2)
        + 1.0 / R
        + z * e_dc
    )


def soft_core_1d(z, model: PotentialModel):
    return soft_core_2d(z, model.R, model.e_dc, model.softening)


def dipole(z):
    """Length-gauge coupling operator; the field enters the Hamiltonian as ``+dipole(z)*E``."""
    return np.asarray(z, dtype=float)


@dataclass(frozen=True)
class BarrierInfo:
    barrier_top: float
    minima: tuple[tuple[float, float], ...]


def barrier_info(model: PotentialModel, n_scan: int = 4001) -> BarrierInfo:
    """Barrier height V(0) and the two well minima, refined to 1e-8 bohr."""
    if abs(model.e_dc) >= 1e-2:
        raise ValueError(f"barrier analysis assumes a weak tilt, got e_dc={model.e_dc}")
    half = model.R / 2
    z = np.linspace(-2 * half - 5, 2 * half + 5, n_scan)
    v = model(z)
    interior = np.flatnonzero((v[1:-1] < v[:-2]) & (v[1:-1] < v[2:])) + 1
    if len(interior) < 2:
        raise DegenerateGeometryError(
            f"R={model.R}: potential has {len(interior)} interior minima, need two wells"
        )
    minima = []
    step = z[1] - z[0]
    for i in interior:
        res = minimize_scalar(
            model, bracket=(z[i] - step, z[i], z[i] + step), method="golden", tol=1e-12
        )
        minima.append((float(res.x), float(res.fun)))
    return BarrierInfo(float(model(0.0)), tuple(sorted(minima)))


@dataclass
class BOCurveSet:
    """Lowest ``K`` adiabatic electronic energies (Hartree) on an R scan."""

    r_values: np.ndarray
    curves: np.ndarray  # shape (len(r_values), K)

    @property
    def n_curves(self) -> int:
        return self.curves.shape[1]

    def curve(self, k: int) -> np.ndarray:
        """V_k(R) with 1-based ``k`` (V_1 is the ground curve)."""
        return self.curves[:, k - 1]

    def to_text(self) -> str:
        head = "# R[bohr] " + " ".join(f"V_{k + 1}[hartree]" for k in range(self.n_curves))
        rows = [head]
        for r, vals in zip(self.r_values, self.curves):
            rows.append(" ".join(f"{x:.16e}" for x in (r, *vals)))
        return "\n".join(rows) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "BOCurveSet":
        data = np.loadtxt(text.splitlines(), comments="#", ndmin=2)
        return cls(data[:, 0], data[:, 1:])


def bo_curves(r_values, z_grid: Grid1D, n_curves: int, softening: float = 1.0) -> BOCurveSet:
    """Diagonalize the electronic Hamiltonian at each R."""
    from .eigensolver import fgh_energies

    r_values = np.asarray(r_values, dtype=float)
    curves = np.empty((len(r_values), n_curves))
    for i, r in enumerate(r_values):
        model = PotentialModel(float(r), 0.0, softening)
        curves[i] = fgh_energies(z_grid, model(z_grid.x), n_curves)
    return BOCurveSet(r_values, curves)
