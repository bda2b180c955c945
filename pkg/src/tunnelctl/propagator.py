"""
Strang split-operator propagation in 1D (electron, fixed nuclei) and 2D
(electron + internuclear distance), with a length-gauge field and complex
absorbing boundaries.

One step applies ``exp(-i V_eff dt/2) exp(-i T dt) exp(-i V_eff dt/2)`` with
``V_eff = V + z E - i W``. Analytic fields are sampled at the step midpoint;
closed-loop (local control) fields are computed from the state at the start
of the step and held for the step.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
import math

import numpy as np
import scipy.fft as sfft

from .analysis import domain_populations, target_projection
from .control import ControlPolicy, RecordedField, lct_field
from .errors import GridError, GridMismatchError, NumericBlowupError
from .grid import PROTON_MASS, Grid1D, Grid2D, WaveFunction, expectation


@dataclass
class PropagationConfig:
    dt: float = 0.05
    t_final: float = 0.0
    absorber_width: float = 20.0
    absorber_strength: float = 0.5
    record_stride: int = 10
    nuclear_mass: float = PROTON_MASS
    snapshot_times: tuple = ()

    def __post_init__(self):
        if not 0 < self.dt <= 0.1:
            raise ValueError(f"dt must lie in (0, 0.1] a.u., got {self.dt}")
        if self.t_final < 0:
            raise ValueError(f"t_final must be non-negative, got {self.t_final}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.absorber_strength < 0 or self.absorber_width <= 0:
            raise ValueError("absorber width must be positive and strength non-negative")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


def absorber_mask(grid, width: float = 20.0, strength: float = 0.5) -> np.ndarray:
    """Non-negative absorbing potential ``W`` with a sin^2 ramp of ``width`` bohr.

    In 1D both edges absorb. On a :class:`Grid2D` the two z-edges and the
    large-R edge absorb.
    """
    if width <= 0:
        raise GridError(f"absorber width must be positive, got {width}")
    if isinstance(grid, Grid2D):
        wz = absorber_mask(grid.z_grid, width, strength)
        wr = _ramp(grid.r_grid, width, strength, lower=False)
        return wz[:, None] + wr[None, :]
    return _ramp(grid, width, strength, lower=True)


def _ramp(grid: Grid1D, width, strength, lower):
    if width > grid.length / 2:
        raise GridError(f"absorber width {width} exceeds half the grid extent {grid.length / 2}")
    x = grid.x
    w = np.zeros_like(x)
    depth = x - (grid.x_max - width)
    m = depth > 0
    w[m] = strength * np.sin(0.5 * np.pi * depth[m] / width) ** 2
    if lower:
        depth = (grid.x_min + width) - x
        m = depth > 0
        w[m] += strength * np.sin(0.5 * np.pi * depth[m] / width) ** 2
    return w


class SplitOperator:
    """Precomputed propagation factors for a fixed grid, potential and step."""

    def __init__(self, grid, potential, dt, mass=PROTON_MASS, absorber=None):
        potential = np.asarray(potential, dtype=float)
        if potential.shape != grid.shape:
            raise GridMismatchError(f"potential shape {potential.shape} != grid shape {grid.shape}")
        self.grid = grid
        self.dt = dt
        w = 0.0 if absorber is None else absorber
        self.half_potential = np.exp((-1j * potential - w) * (dt / 2))
        if isinstance(grid, Grid2D):
            kz, kr = grid.z_grid.k, grid.r_grid.k
            # -(1/M) d^2/dR^2, coefficient as in the 1+1D Hamiltonian
            self.kinetic = np.exp(-1j * dt * (0.5 * kz[:, None] ** 2 + kr[None, :] ** 2 / mass))
            self.z = grid.z_grid.x[:, None]
            self._fft, self._ifft = sfft.fft2, sfft.ifft2
        else:
            self.kinetic = np.exp(-0.5j * dt * grid.k**2)
            self.z = grid.x
            self._fft, self._ifft = sfft.fft, sfft.ifft

    def step(self, amps: np.ndarray, field_value: float = 0.0) -> np.ndarray:
        h = self.half_potential
        if field_value:
            h = h * np.exp((-0.5j * self.dt * field_value) * self.z)
        out = self._fft(h * amps, overwrite_x=True)
        out *= self.kinetic
        out = self._ifft(out, overwrite_x=True)
        out *= h
        return out


def step_1d(psi: WaveFunction, potential, field_value: float, dt: float, absorber=None) -> WaveFunction:
    """One Strang step of the fixed-nuclei problem."""
    if not isinstance(psi.grid, Grid1D):
        raise GridMismatchError("step_1d needs a 1D wavefunction")
    prop = SplitOperator(psi.grid, potential, dt, absorber=absorber)
    out = prop.step(psi.amplitudes, field_value)
    if not np.isfinite(out[0]):
        raise NumericBlowupError("non-finite amplitudes", last_good_time=0.0)
    return WaveFunction(out, psi.grid)


def step_2d(psi: WaveFunction, potential, field_value: float, dt: float, mass: float = PROTON_MASS,
            absorber=None) -> WaveFunction:
    """One Strang step of the electron-nuclear problem; the field couples to z only."""
    if not isinstance(psi.grid, Grid2D):
        raise GridMismatchError("step_2d needs a 2D wavefunction")
    prop = SplitOperator(psi.grid, potential, dt, mass=mass, absorber=absorber)
    out = prop.step(psi.amplitudes, field_value)
    if not np.isfinite(out[0, 0]):
        raise NumericBlowupError("non-finite amplitudes", last_good_time=0.0)
    return WaveFunction(out, psi.grid)


@dataclass
class ObservableTrace:
    """Observables recorded every ``record_stride`` steps.

    ``field`` is the field applied during the step that starts at ``time``.
    ``field_history`` holds the field of every step, enough to replay a
    closed-loop run open-loop.
    """

    time: list = dataclasses.field(default_factory=list)
    field: list = dataclasses.field(default_factory=list)
    p_left: list = dataclasses.field(default_factory=list)
    p_right: list = dataclasses.field(default_factory=list)
    p_total: list = dataclasses.field(default_factory=list)
    p_target: list = dataclasses.field(default_factory=list)
    mean_z: list = dataclasses.field(default_factory=list)
    mean_r: list = dataclasses.field(default_factory=list)
    field_history: list = dataclasses.field(default_factory=list)
    dt: float = 0.0
    snapshots: list = dataclasses.field(default_factory=list)

    COLUMNS = ("time", "field", "p_left", "p_right", "p_total", "p_target", "mean_z", "mean_r")
    UNITS = ("au_time", "au_field", "prob", "prob", "prob", "prob", "bohr", "bohr")

    def __len__(self):
        return len(self.time)

    def array(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    def table(self) -> np.ndarray:
        return np.column_stack([self.array(c) for c in self.COLUMNS]) if self.time else np.empty((0, 8))

    def final(self) -> dict:
        return {c: float(getattr(self, c)[-1]) for c in self.COLUMNS}

    def record(self, t, e, psi, target):
        p_l, p_r = domain_populations(psi)
        self.time.append(t)
        self.field.append(e)
        self.p_left.append(p_l)
        self.p_right.append(p_r)
        self.p_total.append(psi.norm2())
        self.p_target.append(target_projection(psi, target) if target is not None else math.nan)
        if isinstance(psi.grid, Grid2D):
            z, r = psi.grid.z_grid.x[:, None], psi.grid.r_grid.x[None, :]
            self.mean_z.append(expectation(psi, z))
            self.mean_r.append(expectation(psi, r))
        else:
            self.mean_z.append(expectation(psi, psi.grid.x))
            self.mean_r.append(math.nan)


def _field_value(source, n, t, dt, amps, grid):
    if source is None:
        return 0.0
    if isinstance(source, ControlPolicy):
        return lct_field(WaveFunction(amps, grid), source)
    if isinstance(source, RecordedField):
        return source.values[n]
    return float(source(t + dt / 2))


def propagate(psi0: WaveFunction, potential, config: PropagationConfig, field_source=None,
              target: WaveFunction | None = None) -> tuple[WaveFunction, ObservableTrace]:
    """Evolve ``psi0`` to ``config.t_final`` and record observables.

    ``potential`` is the static potential on the grid of ``psi0`` (include any
    DC tilt there). ``field_source`` is ``None``, a callable ``E(t)``, a
    :class:`ControlPolicy` (closed loop) or a :class:`RecordedField`.
    ``target`` is the electronic state used for the target population.

    On a numerical blow-up a :class:`NumericBlowupError` carrying the partial
    trace is raised.
    """
    grid = psi0.grid
    if target is not None:
        tgrid = grid.z_grid if isinstance(grid, Grid2D) else grid
        if target.grid != tgrid:
            raise GridMismatchError("target state must live on the electronic grid")
    absorber = None
    if config.absorber_strength > 0:
        axis = grid.z_grid if isinstance(grid, Grid2D) else grid
        if config.absorber_width >= 0.25 * axis.length:
            raise GridError(
                f"absorber width {config.absorber_width} must stay below 25% of the grid extent"
            )
        absorber = absorber_mask(grid, config.absorber_width, config.absorber_strength)
    prop = SplitOperator(grid, potential, config.dt, mass=config.nuclear_mass, absorber=absorber)
    n_steps = config.n_steps
    if isinstance(field_source, RecordedField) and len(field_source.values) < n_steps:
        raise ValueError(
            f"recorded field has {len(field_source.values)} steps, run needs {n_steps}"
        )
    snap_steps = {int(round(t / config.dt)): t for t in config.snapshot_times}

    trace = ObservableTrace(dt=config.dt)
    amps = psi0.amplitudes.copy()
    dt = config.dt
    stride = config.record_stride
    probe = (0,) * amps.ndim
    for n in range(n_steps + 1):
        t = n * dt
        if n in snap_steps:
            trace.snapshots.append((t, WaveFunction(amps.copy(), grid)))
        e = _field_value(field_source, n, t, dt, amps, grid) if n < n_steps else 0.0
        if n % stride == 0 or n == n_steps:
            trace.record(t, e, WaveFunction(amps, grid), target)
        if n == n_steps:
            break
        trace.field_history.append(e)
        new = prop.step(amps, e)
        if not np.isfinite(new[probe]):
            raise NumericBlowupError(
                f"non-finite amplitudes in step starting at t={t:.6g}", last_good_time=t, trace=trace
            )
        amps = new
    return WaveFunction(amps, grid), trace


def energy(psi: WaveFunction, potential, mass: float = PROTON_MASS) -> float:
    """<H> of the field-free Hamiltonian (kinetic from momentum space)."""
    amps = psi.amplitudes
    grid = psi.grid
    if isinstance(grid, Grid2D):
        kz, kr = grid.z_grid.k, grid.r_grid.k
        t = 0.5 * kz[:, None] ** 2 + kr[None, :] ** 2 / mass
        phi = sfft.fft2(amps)
    else:
        t = 0.5 * grid.k**2
        phi = sfft.fft(amps)
    kin = np.sum(t * np.abs(phi) ** 2) / np.sum(np.abs(phi) ** 2)
    return float(kin + expectation(psi, potential))
