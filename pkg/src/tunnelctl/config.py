"""
Scenario configuration: a nested mapping with a fixed key schema.

Files are YAML. Every key has a default, unknown keys are rejected by name,
and ``key=value`` overrides use dotted paths (``propagation.dt=0.05``).
"""
from __future__ import annotations

import copy
from pathlib import Path

import yaml

from .errors import ConfigError
from .grid import PROTON_MASS

FIELD_KINDS = ("none", "four_state", "pulses", "lct", "recorded")
ROUTES = ("auto", "symmetric", "tilted")
LEVELS = ("ground", "first_excited")
SWEEP_BRANCHES = ("momentum+", "momentum-", "width")

DEFAULTS = {
    "scenario": "custom",
    "geometry": {
        "dims": 1,
        "R": 20.0,
        "z_min": -80.0,
        "z_max": 80.0,
        "n_z": 1024,
        "r_min": 0.1,
        "r_max": 150.0,
        "n_r": 512,
        "softening": 1.0,
    },
    "initial": {
        "level": "ground",
        "side": "left",
        "route": "auto",
        "k_e": 0.0,
        "seed": 0.0,
        "r0": None,
        "sigma": 0.31,
        "k_n": 0.0,
    },
    "field": {
        "kind": "none",
        "e_dc": 0.0,
        "dc_during_propagation": True,
        "lam": -0.2,
        "e_max": 0.1,
        "amplitude": 0.02,
        "pump_fs": 20.0,
        "dump_fs": 10.0,
        "omega": None,
        "levels_n_z": 1024,
        "pulses": [],
        "recorded": None,
        "replay_unseeded": False,
    },
    "propagation": {
        "dt": 0.05,
        "t_final_fs": None,
        "tail_fs": 20.0,
        "absorber_width": 20.0,
        "absorber_strength": 0.5,
        "record_stride": 10,
        "mass": PROTON_MASS,
        "snapshot_fs": [],
    },
    "output": {
        "dir": None,
        "snapshots": True,
    },
    "sweep": {
        "branch": "momentum-",
        "energies_ev": [],
        "workers": None,
        "cache_dir": None,
    },
}

_CHOICES = {
    "field.kind": FIELD_KINDS,
    "initial.route": ROUTES,
    "initial.level": LEVELS,
    "initial.side": ("left", "right"),
    "geometry.dims": (1, 2),
    "sweep.branch": SWEEP_BRANCHES,
}


_NULLABLE = {
    "initial.r0": 0.0,
    "field.omega": 0.0,
    "field.recorded": "",
    "propagation.t_final_fs": 0.0,
    "output.dir": "",
    "sweep.workers": 0,
    "sweep.cache_dir": "",
}


def _coerce(key, default, value):
    if value is None:
        return None
    if default is None:
        default = _NULLABLE[key]
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(key, f"expected a list, got {value!r}")
        return list(value)
    return value


def _merge(base, override, prefix=""):
    for key, value in override.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(path, "unknown key")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(path, "expected a section")
            _merge(base[key], value, path + ".")
        else:
            base[key] = _coerce(path, DEFAULTS_FLAT.get(path), value)


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[f"{prefix}{k}"] = v
    return out


DEFAULTS_FLAT = _flatten(DEFAULTS)


def validate(cfg: dict) -> dict:
    for key, choices in _CHOICES.items():
        section, name = key.split(".")
        if cfg[section][name] not in choices:
            raise ConfigError(key, f"must be one of {list(choices)}, got {cfg[section][name]!r}")
    prop = cfg["propagation"]
    if not 0 < prop["dt"] <= 0.1:
        raise ConfigError("propagation.dt", f"must lie in (0, 0.1], got {prop['dt']}")
    if prop["record_stride"] < 1:
        raise ConfigError("propagation.record_stride", "must be >= 1")
    if cfg["geometry"]["R"] <= 0:
        raise ConfigError("geometry.R", "must be positive")
    if not 0 <= cfg["initial"]["seed"] < 0.05:
        raise ConfigError("initial.seed", "must lie in [0, 0.05)")
    if cfg["field"]["kind"] == "recorded" and not cfg["field"]["recorded"]:
        raise ConfigError("field.recorded", "recorded field needs a file path")
    return cfg


def resolve(overrides: dict | None = None) -> dict:
    """Defaults merged with ``overrides`` and validated."""
    cfg = copy.deepcopy(DEFAULTS)
    if overrides:
        if not isinstance(overrides, dict):
            raise ConfigError("<root>", "configuration must be a mapping")
        _merge(cfg, overrides)
    return validate(cfg)


def parse_assignment(text: str) -> dict:
    """``"a.b=value"`` -> ``{"a": {"b": value}}`` with YAML-typed value."""
    if "=" not in text:
        raise ConfigError(text, "override must look like key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if key not in DEFAULTS_FLAT:
        raise ConfigError(key, "unknown key")
    value = yaml.safe_load(raw) if raw.strip() else None
    if isinstance(value, str):
        # YAML 1.1 reads exponents without a dot ("1e-6") as strings
        try:
            value = float(value)
        except ValueError:
            pass
    out: dict = {}
    node = out
    parts = key.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value
    return out


def deep_update(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_update(out[k], v)
        else:
            out[k] = v
    return out


def load(path=None, assignments=(), base: dict | None = None) -> dict:
    """Read a YAML file (or start from ``base``), apply ``key=value`` overrides, resolve."""
    raw = copy.deepcopy(base) if base else {}
    if path is not None:
        with open(path) as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ConfigError(str(path), "configuration file must hold a mapping")
        if "config" in loaded and "scenario" not in loaded:
            loaded = loaded["config"]  # a run manifest
        raw = deep_update(raw, loaded)
    for a in assignments:
        raw = deep_update(raw, parse_assignment(a))
    return resolve(raw)


def dump(cfg: dict) -> str:
    return yaml.safe_dump(cfg, sort_keys=False)


def save(path, data: dict):
    Path(path).write_text(dump(data))
