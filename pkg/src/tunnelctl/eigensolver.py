"""
Fourier Grid Hamiltonian bound states, localized left/right states and
tunneling times of symmetric doublets.
"""
from __future__ import annotations

import warnings

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import DegeneratePairError, EigenSolveError, LocalizationError
from .grid import AU_TIME_FS, Grid1D, WaveFunction, expectation, inner_product
from .potentials import PotentialModel

DENSE_LIMIT = 2048
RESIDUAL_TOL = 1e-8


@dataclass
class EigenPair:
    energy: float
    state: WaveFunction
    mean_z: float
    parity: int  # +1 gerade, -1 ungerade, 0 if not a parity eigenstate

    @property
    def side(self) -> str:
        if self.mean_z < 0:
            return "left"
        return "right" if self.mean_z > 0 else "center"


@dataclass(frozen=True)
class TunnelingReport:
    e_low: float
    e_high: float
    label: str = ""

    def __post_init__(self):
        if not self.e_high - self.e_low > 1e-14:
            raise DegeneratePairError(
                f"splitting {self.e_high - self.e_low:.3e} hartree is zero or negative; "
                "tunneling time is infinite"
            )

    @property
    def splitting(self) -> float:
        return self.e_high - self.e_low

    @property
    def time_au(self) -> float:
        """Half period of the doublet beat: full left-to-right inversion."""
        return np.pi / self.splitting

    @property
    def time_fs(self) -> float:
        return self.time_au * AU_TIME_FS


def tunneling_time(e_low: float, e_high: float, label: str = "") -> TunnelingReport:
    return TunnelingReport(float(e_low), float(e_high), label)


def kinetic_matrix(grid: Grid1D, mass: float = 1.0) -> np.ndarray:
    """Dense spectral kinetic matrix -1/(2m) d^2/dx^2 on the periodic grid.

    Returned unsymmetrized so callers can inspect its Hermiticity.
    """
    column = sfft.ifft(grid.k**2 / (2 * mass)).real
    return sla.circulant(column)


def reflection_index(grid: Grid1D) -> np.ndarray | None:
    """Index map for z -> -z, or None if the grid is not centred on zero."""
    if not np.isclose(grid.x_min, -grid.x_max):
        return None
    return (-np.arange(grid.n_points)) % grid.n_points


def _parity_adapt(energies, vectors, grid, potential, tol=1e-6):
    """Rotate near-degenerate clusters of a symmetric problem into parity eigenstates."""
    refl = reflection_index(grid)
    if refl is None or np.max(np.abs(potential - potential[refl])) > 1e-12:
        return energies, vectors
    energies = np.array(energies, dtype=float)
    vectors = vectors.copy()
    i = 0
    n = len(energies)
    while i < n:
        j = i + 1
        while j < n and energies[j] - energies[j - 1] < tol:
            j += 1
        if j - i > 1:
            block = vectors[:, i:j]
            pmat = block.T @ block[refl]
            _, rot = np.linalg.eigh((pmat + pmat.T) / 2)
            # Rayleigh quotients of the rotated vectors, then restore energy order
            e_rot = (rot**2).T @ energies[i:j]
            order = np.argsort(e_rot)
            energies[i:j] = e_rot[order]
            vectors[:, i:j] = (block @ rot)[:, order]
        i = j
    return energies, vectors


def _dense_solve(grid, potential, n_states, mass):
    h = kinetic_matrix(grid, mass)
    asym = np.max(np.abs(h - h.T))
    if asym > 1e-12 * max(1.0, np.max(np.abs(h))):
        raise EigenSolveError(f"kinetic matrix not Hermitian (asymmetry {asym:.2e})")
    h = (h + h.T) / 2
    h[np.diag_indices_from(h)] += potential
    try:
        energies, vectors = sla.eigh(h, subset_by_index=(0, n_states - 1))
    except np.linalg.LinAlgError as exc:
        raise EigenSolveError(f"dense diagonalization failed: {exc}") from exc
    return h, energies, vectors


def _hamiltonian_operator(grid, potential, mass):
    t = grid.k**2 / (2 * mass)

    def matvec(v):
        v = np.asarray(v).ravel()
        return sfft.ifft(t * sfft.fft(v)).real + potential * v

    return LinearOperator((grid.n_points, grid.n_points), matvec=matvec, dtype=float)


def _iterative_solve(grid, potential, n_states, mass):
    op = _hamiltonian_operator(grid, potential, mass)
    rng = np.random.default_rng(0)
    energies, vectors = eigsh(op, k=n_states, which="SA", tol=1e-13, v0=rng.standard_normal(grid.n_points))
    order = np.argsort(energies)
    return op, energies[order], vectors[:, order]


def _residuals(h, energies, vectors):
    hv = h @ vectors if isinstance(h, np.ndarray) else np.column_stack([h.matvec(v) for v in vectors.T])
    return np.linalg.norm(hv - vectors * energies, axis=0)


def fgh_solve(grid: Grid1D, potential, n_states: int, mass: float = 1.0) -> list[EigenPair]:
    """Lowest ``n_states`` eigenpairs of ``-1/(2m) d^2/dz^2 + V``.

    States are normalized with the grid measure (``sum |psi|^2 dz = 1``),
    real, and carry their mean position and parity. Exactly or nearly
    degenerate pairs of a reflection-symmetric problem come back as parity
    eigenstates.
    """
    potential = np.asarray(potential, dtype=float)
    if not 0 < n_states <= grid.n_points:
        raise ValueError(f"n_states must be in 1..{grid.n_points}, got {n_states}")
    if grid.n_points <= DENSE_LIMIT:
        h, energies, vectors = _dense_solve(grid, potential, n_states, mass)
    else:
        h, energies, vectors = _iterative_solve(grid, potential, n_states, mass)
    res = _residuals(h, energies, vectors)
    if np.any(res > RESIDUAL_TOL):
        raise EigenSolveError(f"eigenvector residuals too large (max {res.max():.2e})", res)
    energies, vectors = _parity_adapt(energies, vectors, grid, potential)

    refl = reflection_index(grid)
    z = grid.x
    pairs = []
    for e, v in zip(energies, vectors.T):
        # fix the sign so the largest lobe is positive
        v = v * np.sign(v[np.argmax(np.abs(v))])
        psi = WaveFunction(v / np.sqrt(grid.dx), grid)
        parity = 0
        if refl is not None:
            p = float(np.dot(v, v[refl]))
            parity = int(np.sign(p)) if abs(abs(p) - 1) < 1e-6 else 0
        pairs.append(EigenPair(float(e), psi, expectation(psi, z), parity))
    return pairs


def fgh_energies(grid: Grid1D, potential, n_states: int, mass: float = 1.0) -> np.ndarray:
    """Eigenvalues only; cheaper than :func:`fgh_solve` for curve scans."""
    potential = np.asarray(potential, dtype=float)
    if grid.n_points > DENSE_LIMIT:
        return _iterative_solve(grid, potential, n_states, mass)[1]
    h = kinetic_matrix(grid, mass)
    h = (h + h.T) / 2
    h[np.diag_indices_from(h)] += potential
    return sla.eigh(h, eigvals_only=True, subset_by_index=(0, n_states - 1))


LEVELS = {"ground": 0, "first_excited": 1}


@dataclass
class LocalizedPair:
    left: EigenPair
    right: EigenPair
    route: str
    level: int

    @property
    def overlap(self) -> float:
        return abs(inner_product(self.left.state, self.right.state))


def _level_index(level) -> int:
    if isinstance(level, str):
        try:
            return LEVELS[level]
        except KeyError:
            raise ValueError(f"unknown level {level!r}; expected one of {sorted(LEVELS)}") from None
    return int(level)


def _symmetric_pair(model, grid, lvl):
    states = fgh_solve(grid, model.with_tilt(0.0)(grid.x), 2 * lvl + 2)
    g, u = states[2 * lvl], states[2 * lvl + 1]
    a = (g.state.amplitudes + u.state.amplitudes) / np.sqrt(2)
    b = (g.state.amplitudes - u.state.amplitudes) / np.sqrt(2)
    energy = 0.5 * (g.energy + u.energy)
    out = []
    for amp in (a, b):
        amp = amp * np.sign(amp.real[np.argmax(np.abs(amp))])
        psi = WaveFunction(amp, grid)
        out.append(EigenPair(energy, psi, expectation(psi, grid.x), 0))
    left, right = sorted(out, key=lambda p: p.mean_z)
    return LocalizedPair(left, right, "symmetric", lvl)


def _localized(states, side, threshold, lvl):
    if side == "left":
        picked = [s for s in states if s.mean_z < -threshold]
    else:
        picked = [s for s in states if s.mean_z > threshold]
    return picked[lvl] if len(picked) > lvl else None


def localized_pair(model: PotentialModel, grid: Grid1D, level="ground", route: str = "auto") -> LocalizedPair:
    """Left- and right-localized states of the given vibronic ``level``.

    ``route="symmetric"`` forms (g +- u)/sqrt(2) from the field-free
    doublet. ``route="tilted"`` diagonalizes twice, once with +|e_dc| (left
    well lowered) and once with -|e_dc| (right well lowered), and takes the
    ``level``-th localized state on the favoured side of each. ``auto``
    picks ``symmetric`` when ``model.e_dc == 0``.
    """
    lvl = _level_index(level)
    if route == "auto":
        route = "symmetric" if model.e_dc == 0 else "tilted"
    if route == "symmetric":
        pair = _symmetric_pair(model, grid, lvl)
    elif route == "tilted":
        if model.e_dc == 0:
            raise LocalizationError("tilted route needs a nonzero DC field")
        threshold = model.R / 4
        n = min(grid.n_points, 4 * lvl + 8)
        mag = abs(model.e_dc)
        left = _localized(fgh_solve(grid, model.with_tilt(mag)(grid.x), n), "left", threshold, lvl)
        right = _localized(fgh_solve(grid, model.with_tilt(-mag)(grid.x), n), "right", threshold, lvl)
        if left is None or right is None:
            raise LocalizationError(
                f"R={model.R}, e_dc={model.e_dc}: no state at level {lvl} localized beyond "
                f"|<z>| > R/4; try a larger |e_dc|"
            )
        pair = LocalizedPair(left, right, "tilted", lvl)
    else:
        raise ValueError(f"unknown route {route!r}")

    if pair.left.mean_z >= -model.R / 4 or pair.right.mean_z <= model.R / 4:
        raise LocalizationError(
            f"states not localized: <z>_left={pair.left.mean_z:.3f}, <z>_right={pair.right.mean_z:.3f}"
        )
    if pair.overlap >= 1e-3:
        # states from the two tilt signs are not mutually orthogonal
        warnings.warn(
            f"left/right overlap {pair.overlap:.2e} exceeds 1e-3; a larger |e_dc| localizes better",
            stacklevel=2,
        )
    return pair


def doublet_tunneling(model: PotentialModel, grid: Grid1D, level="ground") -> TunnelingReport:
    """Inversion time of the field-free gerade/ungerade doublet at ``level``."""
    lvl = _level_index(level)
    energies = fgh_energies(grid, model.with_tilt(0.0)(grid.x), 2 * lvl + 2)
    name = "ground" if lvl == 0 else f"level {lvl}"
    return tunneling_time(energies[2 * lvl], energies[2 * lvl + 1], label=f"R={model.R} {name} pair")
