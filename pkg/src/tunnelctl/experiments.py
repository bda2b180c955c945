"""
End-to-end scenarios: initial-state recipes, single runs with manifests, and
parameter sweeps over the initial nuclear wave packet.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
import copy
from dataclasses import dataclass, field
import hashlib
import json
import math
import os
from pathlib import Path
import warnings

import numpy as np
import yaml

from . import __version__
from . import config as cfgmod
from .analysis import domain_populations, ionization_yield, target_projection
from .control import (
    ControlPolicy,
    PulseSequence,
    RecordedField,
    boost,
    four_state_levels,
    four_state_schedule,
    seed_initial_state,
)
from .eigensolver import doublet_tunneling, localized_pair
from .errors import TunnelctlError
from .grid import (
    AU_TIME_FS,
    HARTREE_EV,
    PROTON_MASS,
    Grid1D,
    Grid2D,
    WaveFunction,
    fs_to_au,
)
from .io import read_field, write_field, write_snapshot, write_trace
from .potentials import PotentialModel, soft_core_2d
from .propagator import PropagationConfig, propagate


# ---------------------------------------------------------------- geometry

def z_grid(cfg) -> Grid1D:
    g = cfg["geometry"]
    return Grid1D(g["n_z"], g["z_min"], g["z_max"])


def grid_2d(cfg) -> Grid2D:
    g = cfg["geometry"]
    return Grid2D(z_grid(cfg), Grid1D(g["n_r"], g["r_min"], g["r_max"]))


def _r0(cfg) -> float:
    r0 = cfg["initial"]["r0"]
    return cfg["geometry"]["R"] if r0 is None else r0


def _model(cfg, e_dc=None) -> PotentialModel:
    g = cfg["geometry"]
    e = cfg["field"]["e_dc"] if e_dc is None else e_dc
    return PotentialModel(_r0(cfg), e, g["softening"])


# ------------------------------------------------------ kinetic energy axes

def nuclear_kinetic_energy(k_n: float, sigma: float, mass: float = PROTON_MASS) -> float:
    """<T_R> in Hartree of ``exp(-(R-R0)^2/(4 sigma^2) + i k_n R)`` with T = -(1/M) d^2/dR^2."""
    return (k_n**2 + 1.0 / (4 * sigma**2)) / mass


def momentum_for_energy(energy_ev: float, sigma: float, sign: int, mass: float = PROTON_MASS) -> float:
    floor = nuclear_kinetic_energy(0.0, sigma, mass) * HARTREE_EV
    if energy_ev < floor - 1e-12:
        raise ValueError(f"{energy_ev} eV is below the zero-momentum energy {floor:.4f} eV at sigma={sigma}")
    return sign * math.sqrt(max(0.0, energy_ev / HARTREE_EV * mass - 1.0 / (4 * sigma**2)))


def width_for_energy(energy_ev: float, mass: float = PROTON_MASS) -> float:
    return 1.0 / math.sqrt(4 * mass * energy_ev / HARTREE_EV)


# ----------------------------------------------------------- initial states

def _electronic_pair(cfg, grid):
    init = cfg["initial"]
    return localized_pair(_model(cfg), grid, init["level"], route=init["route"])


def _target_pair(cfg, grid):
    """Ground-level pair on the same route; supplies the target state."""
    return localized_pair(_model(cfg), grid, "ground", route=cfg["initial"]["route"])


def build_initial_state_1d(cfg) -> WaveFunction:
    """Localized state, boosted by ``k_e`` and seeded with the target."""
    grid = z_grid(cfg)
    init = cfg["initial"]
    pair = _electronic_pair(cfg, grid)
    psi = pair.left.state if init["side"] == "left" else pair.right.state
    psi = boost(psi, init["k_e"]) if init["k_e"] else psi.copy()
    if init["seed"] > 0:
        tp = _target_pair(cfg, grid)
        target = tp.right.state if init["side"] == "left" else tp.left.state
        psi = seed_initial_state(psi, target, init["seed"])
    return psi


def nuclear_packet(r_grid: Grid1D, r0: float, sigma: float, k_n: float) -> np.ndarray:
    r = r_grid.x
    chi = np.exp(-((r - r0) ** 2) / (4 * sigma**2) + 1j * k_n * r)
    chi /= np.sqrt(np.sum(np.abs(chi) ** 2) * r_grid.dx)
    edge = max(abs(chi[0]), abs(chi[-1])) / np.max(np.abs(chi))
    if edge > 1e-8:
        warnings.warn(f"nuclear Gaussian clipped by the R grid (edge amplitude {edge:.1e})", stacklevel=2)
    return chi


def build_initial_state_2d(cfg) -> WaveFunction:
    """Electronic state at R0 times a normalized nuclear Gaussian."""
    grid = grid_2d(cfg)
    init = cfg["initial"]
    elec = build_initial_state_1d(cfg).amplitudes
    chi = nuclear_packet(grid.r_grid, _r0(cfg), init["sigma"], init["k_n"])
    return WaveFunction(elec[:, None] * chi[None, :], grid).normalized()


def build_initial_state(cfg) -> WaveFunction:
    return build_initial_state_2d(cfg) if cfg["geometry"]["dims"] == 2 else build_initial_state_1d(cfg)


def static_potential(cfg, grid):
    e_dc = cfg["field"]["e_dc"] if cfg["field"]["dc_during_propagation"] else 0.0
    soft = cfg["geometry"]["softening"]
    if isinstance(grid, Grid2D):
        z, r = grid.mesh
        return soft_core_2d(z, r, e_dc, soft)
    return soft_core_2d(grid.x, _r0(cfg), e_dc, soft)


# ------------------------------------------------------------------ fields

def _levels_grid(cfg) -> Grid1D:
    g = cfg["geometry"]
    n = g["n_z"] if g["dims"] == 1 else cfg["field"]["levels_n_z"]
    return Grid1D(n, g["z_min"], g["z_max"])


def build_field(cfg, target):
    """Field source plus derived quantities for the manifest."""
    f = cfg["field"]
    kind = f["kind"]
    derived: dict = {}
    if kind == "none":
        return None, derived
    if kind == "pulses":
        seq = PulseSequence.from_list(f["pulses"])
        derived["pulses"] = seq.to_list()
        return seq, derived
    if kind == "four_state":
        levels = four_state_levels(_r0(cfg), _levels_grid(cfg))
        sched = four_state_schedule(
            levels, f["amplitude"], fs_to_au(f["pump_fs"]), fs_to_au(f["dump_fs"]), f["omega"]
        )
        derived.update(sched.info)
        derived["pulses"] = sched.sequence.to_list()
        derived["schedule_end_fs"] = sched.end * AU_TIME_FS
        return sched.sequence, derived
    if kind == "lct":
        if cfg["geometry"]["dims"] != 1:
            raise TunnelctlError("closed-loop control runs only with fixed nuclei")
        policy = ControlPolicy(f["lam"], target, cfg["initial"]["seed"], f["e_max"])
        return policy, derived
    if kind == "recorded":
        values, dt = read_field(f["recorded"])
        if dt is not None and dt != cfg["propagation"]["dt"]:
            raise TunnelctlError(f"recorded field uses dt={dt}, config has {cfg['propagation']['dt']}")
        derived["recorded_steps"] = len(values)
        return RecordedField(tuple(values)), derived
    raise ValueError(kind)


def _t_final(cfg, source) -> float:
    p = cfg["propagation"]
    if p["t_final_fs"] is not None:
        return fs_to_au(p["t_final_fs"])
    if not hasattr(source, "end"):
        raise cfgmod.ConfigError(
            "propagation.t_final_fs", f"required for field.kind={cfg['field']['kind']!r}"
        )
    return source.end + fs_to_au(p["tail_fs"])


# --------------------------------------------------------------- scenarios

@dataclass
class ScenarioResult:
    config: dict
    manifest: dict
    trace: object = None
    psi: WaveFunction | None = None
    replay: dict | None = None
    replay_trace: object = None

    @property
    def final(self) -> dict:
        return self.manifest.get("results", {})


def _summary(trace, psi, target) -> dict:
    p_l, p_r = domain_populations(psi)
    out = {
        "p_left": p_l,
        "p_right": p_r,
        "p_total": psi.norm2(),
        "ionization": ionization_yield(trace),
        "p_target": target_projection(psi, target),
        "t_final_fs": trace.time[-1] * AU_TIME_FS,
    }
    out["p_target_over_p_right"] = out["p_target"] / p_r if p_r > 0 else math.nan
    return out


def _float_tree(obj):
    if isinstance(obj, dict):
        return {k: _float_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_float_tree(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def run_scenario(cfg: dict, write: bool = True) -> ScenarioResult:
    """Run one scenario from a resolved config.

    Writes ``trace.dat``, ``field.dat``, ``manifest.yaml`` and snapshots to
    ``output.dir`` when set. A failing stage is recorded in the manifest and
    the exception re-raised.
    """
    cfg = cfgmod.resolve(copy.deepcopy(cfg))
    manifest = {"code_version": __version__, "config": cfg, "derived": {}, "warnings": [],
                "status": "running", "stage": "setup"}
    result = ScenarioResult(cfg, manifest)
    out_dir = cfg["output"]["dir"] if write else None
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            manifest["stage"] = "initial_state"
            psi0 = build_initial_state(cfg)
            egrid = psi0.grid.z_grid if isinstance(psi0.grid, Grid2D) else psi0.grid
            tp = _target_pair(cfg, egrid)
            target = tp.right.state if cfg["initial"]["side"] == "left" else tp.left.state
            manifest["derived"].update(_tunneling_info(cfg))

            manifest["stage"] = "field"
            source, derived = build_field(cfg, target)
            manifest["derived"].update(derived)
            t_final = _t_final(cfg, source)
            p = cfg["propagation"]
            pconf = PropagationConfig(
                dt=p["dt"], t_final=t_final, absorber_width=p["absorber_width"],
                absorber_strength=p["absorber_strength"], record_stride=p["record_stride"],
                nuclear_mass=p["mass"], snapshot_times=tuple(fs_to_au(t) for t in p["snapshot_fs"]),
            )
            manifest["derived"]["t_final_au"] = t_final
            manifest["derived"]["n_steps"] = pconf.n_steps

            manifest["stage"] = "propagation"
            potential = static_potential(cfg, psi0.grid)
            psi, trace = propagate(psi0, potential, pconf, source, target)
            result.trace, result.psi = trace, psi
            manifest["results"] = _summary(trace, psi, target)

            if cfg["field"]["kind"] == "lct" and cfg["field"]["replay_unseeded"]:
                manifest["stage"] = "replay"
                unseeded = copy.deepcopy(cfg)
                unseeded["initial"]["seed"] = 0.0
                psi0u = build_initial_state(unseeded)
                psi_r, trace_r = propagate(psi0u, potential, pconf, RecordedField.from_trace(trace), target)
                result.replay_trace = trace_r
                result.replay = _summary(trace_r, psi_r, target)
                manifest["replay"] = result.replay
        manifest["warnings"] = list(dict.fromkeys(str(w.message) for w in caught))
        manifest["status"] = "ok"
        manifest["stage"] = "done"
    except Exception as exc:
        manifest["status"] = "failed"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        if out_dir:
            _write_manifest(out_dir, manifest)
        raise
    manifest.update(_float_tree({k: manifest[k] for k in ("derived", "results")}))
    if "replay" in manifest:
        manifest["replay"] = _float_tree(manifest["replay"])
    if out_dir:
        _write_artifacts(out_dir, result)
    return result


def _tunneling_info(cfg) -> dict:
    info = {}
    grid = _levels_grid(cfg)
    model = _model(cfg, 0.0)
    for lvl, name in ((0, "t1_fs"), (1, "t2_fs")):
        try:
            info[name] = doublet_tunneling(model, grid, lvl).time_fs
        except TunnelctlError:
            info[name] = math.inf
    return info


def _write_manifest(out_dir, manifest):
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    cfgmod.save(Path(out_dir) / "manifest.yaml", manifest)


def _write_artifacts(out_dir, result: ScenarioResult):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(out / "trace.dat", result.trace)
    write_field(out / "field.dat", result.trace.field_history, result.trace.dt)
    if result.replay_trace is not None:
        write_trace(out / "trace_replay.dat", result.replay_trace)
    if result.config["output"]["snapshots"]:
        for t, snap in result.trace.snapshots:
            write_snapshot(out / f"snapshot_{t * AU_TIME_FS:09.3f}fs.qwv", snap, t)
        write_snapshot(out / "final.qwv", result.psi, result.trace.time[-1])
    _write_manifest(out, result.manifest)


# ------------------------------------------------------------------ sweeps

@dataclass
class SweepResult:
    branch: str
    rows: list = field(default_factory=list)
    reference: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows if r["status"] == "ok"], dtype=float)

    def to_text(self) -> str:
        cols = ("energy_ev", "k_n", "sigma", "p_right", "p_total", "ratio_p_right", "ratio_p_total", "status")
        lines = [f"# sweep branch={self.branch} reference_p_right={self.reference.get('p_right')} "
                 f"reference_p_total={self.reference.get('p_total')}",
                 "# " + " ".join(cols)]
        for r in self.rows:
            lines.append(" ".join(str(r.get(c)) for c in cols))
        return "\n".join(lines) + "\n"


def sweep_points(base: dict, branch: str, energies_ev) -> list[dict]:
    """Per-point overrides (k_n, sigma) for a kinetic-energy axis in eV."""
    sigma = base["initial"]["sigma"]
    mass = base["propagation"]["mass"]
    pts = []
    for e in energies_ev:
        if branch == "width":
            pts.append({"energy_ev": e, "k_n": 0.0, "sigma": width_for_energy(e, mass)})
        else:
            sign = 1 if branch == "momentum+" else -1
            pts.append({"energy_ev": e, "k_n": momentum_for_energy(e, sigma, sign, mass), "sigma": sigma})
    return pts


_KEY_SECTIONS = ("geometry", "initial", "field", "propagation")


def point_key(cfg: dict) -> str:
    """Cache key of one run: its physics sections plus the code version."""
    physics = {k: cfg[k] for k in _KEY_SECTIONS}
    blob = json.dumps({"code_version": __version__, "config": physics}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:20]


def run_point(cfg: dict, cache_dir=None, trace_rows: int = 200) -> dict:
    """Run one scenario without artifacts and return its final observables.

    Failures are returned as a ``status`` string rather than raised. The
    result carries a thinned trace of at most ``trace_rows`` rows, the
    manifest's derived quantities and warnings, and the open-loop replay
    summary of LCT runs. With
    ``cache_dir`` set, finished runs are stored and reused by
    :func:`point_key`.
    """
    path = Path(cache_dir) / f"{point_key(cfg)}.yaml" if cache_dir else None
    if path is not None and path.exists():
        return yaml.safe_load(path.read_text())["result"]
    try:
        res = run_scenario(cfg, write=False)
    except Exception as exc:  # isolate per-point failures
        return {"status": f"failed: {type(exc).__name__}: {exc}"}
    table = res.trace.table()
    step = max(1, math.ceil(len(table) / trace_rows))
    rows = table[::step]
    if len(table) and (len(table) - 1) % step:
        rows = np.vstack([rows, table[-1:]])
    out = {"status": "ok", **res.final,
           "trace": {c: rows[:, i].tolist() for i, c in enumerate(res.trace.COLUMNS)},
           "derived": res.manifest["derived"], "warnings": res.manifest["warnings"]}
    if res.replay is not None:
        out["replay"] = res.replay
    out = _float_tree(out)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(yaml.safe_dump({"config": cfg, "result": out}, sort_keys=False))
        os.replace(tmp, path)
    return out


def default_workers() -> int:
    env = os.environ.get("QWV_THREADS")
    return max(1, int(env)) if env else 1


def run_sweep(base: dict, branch: str | None = None, energies_ev=None, workers: int | None = None,
              reference: dict | None = None) -> SweepResult:
    """Run 2D scenarios over one sweep axis and normalize by the 1D run.

    ``reference`` may carry precomputed 1D results (``p_right``,
    ``p_total``); otherwise the 1D counterpart of ``base`` is run first.
    With ``sweep.cache_dir`` set, each finished run is stored under a key
    of its resolved config and the code version, and reused when found.
    """
    base = cfgmod.resolve(copy.deepcopy(base))
    branch = branch or base["sweep"]["branch"]
    energies = list(energies_ev if energies_ev is not None else base["sweep"]["energies_ev"])
    workers = workers or base["sweep"]["workers"] or default_workers()
    cache_dir = base["sweep"]["cache_dir"]
    if reference is None:
        ref_cfg = copy.deepcopy(base)
        ref_cfg["geometry"]["dims"] = 1
        ref_cfg["output"]["dir"] = None
        reference = run_point(ref_cfg, cache_dir)
        if reference["status"] != "ok":
            raise TunnelctlError(f"1D reference run {reference['status']}")
    points = sweep_points(base, branch, energies)
    cfgs = []
    for pt in points:
        c = copy.deepcopy(base)
        c["geometry"]["dims"] = 2
        c["initial"]["k_n"] = pt["k_n"]
        c["initial"]["sigma"] = pt["sigma"]
        c["output"]["dir"] = None
        cfgs.append(c)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(run_point, cfgs, [cache_dir] * len(cfgs)))
    else:
        outs = [run_point(c, cache_dir) for c in cfgs]
    result = SweepResult(branch, reference=dict(reference))
    for pt, out in zip(points, outs):
        row = {**pt, **out}
        if out["status"] == "ok":
            row["ratio_p_right"] = out["p_right"] / reference["p_right"]
            row["ratio_p_total"] = out["p_total"] / reference["p_total"]
        result.rows.append(row)
    return result


# ------------------------------------------------------- named scenarios

SCENARIOS = {
    "field-free-R10": {
        "geometry": {"R": 10.0},
        "initial": {"route": "symmetric"},
        "field": {"kind": "none"},
        "propagation": {"t_final_fs": 250.0},
    },
    "lct-R10": {
        "geometry": {"R": 10.0},
        "initial": {"route": "tilted", "k_e": 0.001, "seed": 0.003},
        "field": {"kind": "lct", "e_dc": -5e-3, "lam": -0.2, "replay_unseeded": True},
        "propagation": {"dt": 0.01, "t_final_fs": 150.0, "record_stride": 50},
    },
    "lct-R20": {
        "geometry": {"R": 20.0},
        "initial": {"route": "tilted", "k_e": 0.001, "seed": 0.003},
        "field": {"kind": "lct", "e_dc": -2e-5, "lam": -2.8, "replay_unseeded": True},
        "propagation": {"dt": 0.05, "t_final_fs": 500.0},
    },
    "four-state-R20": {
        "geometry": {"R": 20.0},
        "initial": {"route": "symmetric"},
        "field": {"kind": "four_state"},
    },
    "2d-fourstate-kn0": {
        "geometry": {"dims": 2, "R": 20.0, "n_z": 256, "n_r": 512},
        "initial": {"route": "symmetric", "sigma": 0.31, "k_n": 0.0},
        "field": {"kind": "four_state"},
        "propagation": {"dt": 0.1, "record_stride": 20},
    },
}


def scenario_config(name: str, **sections) -> dict:
    """Resolved config of a named scenario, with per-section overrides."""
    if name not in SCENARIOS:
        raise cfgmod.ConfigError("scenario", f"unknown scenario {name!r}; known: {sorted(SCENARIOS)}")
    raw = cfgmod.deep_update({"scenario": name}, SCENARIOS[name])
    return cfgmod.resolve(cfgmod.deep_update(raw, sections))
