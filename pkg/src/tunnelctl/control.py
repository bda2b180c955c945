"""
Driving fields: the local-control feedback law, sin^2 pulses and the
pump / wait / dump ("four-state") schedule.

Sign convention: the field couples as ``+z E(t)`` and the local-control law
uses ``mu = z``, so the target population grows when ``lam < 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math
import warnings

import numpy as np

from .errors import ForbiddenTransitionError, GridMismatchError, ScheduleError
from .grid import AU_TIME_FS, Grid2D, WaveFunction, fs_to_au, inner_product


@dataclass(frozen=True)
class ControlPolicy:
    """Closed-loop field ``E = clip(lam * Im[<Psi|z|f><f|Psi>], -e_max, e_max)``."""

    lam: float
    target: WaveFunction
    seed: float = 0.003
    e_max: float = 0.1

    def __post_init__(self):
        if not 0 <= self.seed < 0.05:
            raise ValueError(f"seed fraction must be in [0, 0.05), got {self.seed}")
        if not self.e_max > 0:
            raise ValueError("e_max must be positive")
        if isinstance(self.target.grid, Grid2D):
            raise GridMismatchError("local control targets are electronic (1D) states")

    @cached_property
    def _conj_target(self):
        return np.conj(self.target.amplitudes)

    @cached_property
    def _conj_mu_target(self):
        return np.conj(self.target.grid.x * self.target.amplitudes)


def lct_field(psi: WaveFunction, policy: ControlPolicy) -> float:
    if psi.grid != policy.target.grid:
        raise GridMismatchError("state and target live on different grids")
    dv = psi.grid.cell_volume
    a = psi.amplitudes
    # <Psi|z|f> = conj(<f|z|Psi>)
    mu_elem = np.conj(np.dot(policy._conj_mu_target, a) * dv)
    proj = np.dot(policy._conj_target, a) * dv
    e = policy.lam * (mu_elem * proj).imag
    return float(min(max(e, -policy.e_max), policy.e_max))


@dataclass(frozen=True)
class RecordedField:
    """Per-step field values for open-loop replay."""

    values: tuple

    @classmethod
    def from_trace(cls, trace) -> "RecordedField":
        return cls(tuple(trace.field_history))


def boost(psi: WaveFunction, k: float) -> WaveFunction:
    """Multiply by ``exp(i k z)`` (along z in 2D)."""
    if isinstance(psi.grid, Grid2D):
        z = psi.grid.z_grid.x[:, None]
    else:
        z = psi.grid.x
    return WaveFunction(psi.amplitudes * np.exp(1j * k * z), psi.grid)


def seed_initial_state(psi_init: WaveFunction, psi_target: WaveFunction, fraction: float) -> WaveFunction:
    """Mix a small amount of the target into the initial state.

    Returns ``sqrt(1-fraction) psi_init + sqrt(fraction) psi_target``,
    renormalized. A warning is issued when the inputs overlap by more than
    1e-3, since the target population then differs from ``fraction``.
    """
    if not 0 <= fraction < 1:
        raise ValueError(f"seed fraction must lie in [0, 1), got {fraction}")
    if fraction == 0:
        return psi_init.copy()
    ov = abs(inner_product(psi_target, psi_init))
    if ov > 1e-3:
        warnings.warn(f"seeding non-orthogonal states (overlap {ov:.2e})", stacklevel=2)
    amps = math.sqrt(1 - fraction) * psi_init.amplitudes + math.sqrt(fraction) * psi_target.amplitudes
    return WaveFunction(amps, psi_init.grid).normalized()


@dataclass(frozen=True)
class PulseSpec:
    """``A sin^2(pi (t-t0)/tau) cos(omega (t-t0) + phase)`` on ``[t0, t0+tau]``."""

    amplitude: float
    omega: float
    duration: float
    start: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"pulse duration must be positive, got {self.duration}")

    @property
    def end(self) -> float:
        return self.start + self.duration

    def __call__(self, t):
        return pulse_value(self, t)

    def to_dict(self) -> dict:
        return {"amplitude": self.amplitude, "omega": self.omega, "duration": self.duration,
                "start": self.start, "phase": self.phase}


def pulse_value(spec: PulseSpec, t):
    t = np.asarray(t, dtype=float)
    s = t - spec.start
    inside = (s > 0) & (s < spec.duration)  # the envelope vanishes at both endpoints
    val = spec.amplitude * np.sin(np.pi * s / spec.duration) ** 2 * np.cos(spec.omega * s + spec.phase)
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PulseSequence:
    pulses: tuple = ()

    def __call__(self, t):
        if not self.pulses:
            return 0.0 if np.ndim(t) == 0 else np.zeros(np.shape(t))
        return sum(p(t) for p in self.pulses)

    value = __call__

    @property
    def end(self) -> float:
        return max((p.end for p in self.pulses), default=0.0)

    def to_list(self) -> list[dict]:
        return [p.to_dict() for p in self.pulses]

    @classmethod
    def from_list(cls, items) -> "PulseSequence":
        return cls(tuple(PulseSpec(**dict(d)) for d in items))


def pi_pulse_amplitude(dipole_element: float, duration: float, area: float = math.pi) -> float:
    """Peak field giving pulse area ``area`` for a sin^2 envelope.

    The envelope integrates to ``A tau / 2``, so ``|mu| A tau / 2 = area``.
    """
    if dipole_element == 0:
        raise ForbiddenTransitionError("zero transition dipole: the transition is forbidden")
    return 2 * area / (abs(dipole_element) * duration)


def odd_area_duration(dipole_element: float, amplitude: float, nominal: float) -> tuple[float, int]:
    """Duration closest to ``nominal`` whose area is an odd multiple of pi at fixed amplitude.

    Returns ``(duration, multiple)``.
    """
    if dipole_element == 0:
        raise ForbiddenTransitionError("zero transition dipole: the transition is forbidden")
    base = 2 * math.pi / (abs(dipole_element) * amplitude)
    m = max(1, 2 * round((nominal / base - 1) / 2) + 1)
    return m * base, m


@dataclass
class FourStateLevels:
    """Localized states and energies needed by the four-state schedule."""

    R: float
    l1: WaveFunction
    r1: WaveFunction
    l2: WaveFunction
    r2: WaveFunction
    e1: float
    e2: float
    t1: object  # TunnelingReport of the ground pair
    t2: object  # TunnelingReport of the first excited pair

    @property
    def omega(self) -> float:
        return self.e2 - self.e1

    @property
    def dipole_left(self) -> float:
        return inner_product(self.l1, WaveFunction(self.l1.grid.x * self.l2.amplitudes, self.l1.grid)).real

    @property
    def dipole_right(self) -> float:
        return inner_product(self.r2, WaveFunction(self.r2.grid.x * self.r1.amplitudes, self.r1.grid)).real


def four_state_levels(R: float, grid) -> FourStateLevels:
    from .eigensolver import doublet_tunneling, localized_pair
    from .potentials import PotentialModel

    model = PotentialModel(R)
    g = localized_pair(model, grid, "ground", route="symmetric")
    x = localized_pair(model, grid, "first_excited", route="symmetric")
    return FourStateLevels(
        R, g.left.state, g.right.state, x.left.state, x.right.state,
        g.left.energy, x.left.energy,
        doublet_tunneling(model, grid, 0), doublet_tunneling(model, grid, 1),
    )


@dataclass
class Schedule:
    """A pulse sequence plus the quantities it was derived from."""

    sequence: PulseSequence
    wait: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def end(self) -> float:
        return max(self.sequence.end, self.wait)


def four_state_schedule(levels: FourStateLevels, amplitude: float | None = 0.02,
                        pump_duration: float = fs_to_au(20.0), dump_duration: float = fs_to_au(10.0),
                        omega: float | None = None) -> Schedule:
    """Pump L1->L2, wait the excited-pair tunneling time, dump R2->R1.

    With ``amplitude=None`` each pulse gets the pi-pulse amplitude for its
    nominal duration. With a fixed amplitude each duration is moved to the
    nearest odd multiple of a pi area. The dump starts one excited-pair
    inversion time after the pump ends.
    """
    t2 = levels.t2
    if t2 is None or not math.isfinite(t2.time_au):
        raise ScheduleError("excited-pair tunneling time is undefined")
    w = levels.omega if omega is None else omega
    mu_l, mu_r = levels.dipole_left, levels.dipole_right
    if amplitude is None:
        a_p, tau_p, m_p = pi_pulse_amplitude(mu_l, pump_duration), pump_duration, 1
        a_d, tau_d, m_d = pi_pulse_amplitude(mu_r, dump_duration), dump_duration, 1
    else:
        a_p = a_d = amplitude
        tau_p, m_p = odd_area_duration(mu_l, amplitude, pump_duration)
        tau_d, m_d = odd_area_duration(mu_r, amplitude, dump_duration)
    pump = PulseSpec(a_p, w, tau_p, 0.0)
    dump = PulseSpec(a_d, w, tau_d, pump.end + t2.time_au)
    info = {
        "omega": w, "dipole_pump": mu_l, "dipole_dump": mu_r,
        "pump_amplitude": a_p, "dump_amplitude": a_d,
        "pump_duration_fs": tau_p * AU_TIME_FS, "dump_duration_fs": tau_d * AU_TIME_FS,
        "pump_area_pi": m_p, "dump_area_pi": m_d,
        "delay_fs": t2.time_fs, "t2_fs": t2.time_fs, "t1_fs": levels.t1.time_fs,
    }
    return Schedule(PulseSequence((pump, dump)), 0.0, info)


def ground_pair_schedule(levels: FourStateLevels) -> Schedule:
    """Field-free transfer: no pulses, wait one ground-pair inversion time."""
    t1 = levels.t1
    if t1 is None or not math.isfinite(t1.time_au):
        raise ScheduleError("ground-pair tunneling time is undefined")
    return Schedule(PulseSequence(()), t1.time_au, {"t1_fs": t1.time_fs, "wait_fs": t1.time_fs})
