"""
Command-line entry point.

Every subcommand accepts ``--config FILE`` and repeated ``--set key=value``
overrides. Exit status is 0 on success, 1 on a usage or input error and 2
on a numerical failure.
"""
from __future__ import annotations

import argparse
from pathlib import Path
import sys

import numpy as np

from . import __version__
from . import config as cfgmod
from .errors import ConfigError, CorruptFileError, TunnelctlError
from .grid import AU_TIME_FS, Grid2D

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", metavar="FILE", help="YAML scenario file (or a run manifest)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key, e.g. propagation.dt=0.05")
    p.add_argument("--scenario", metavar="NAME", help="start from a built-in scenario")


def _resolve(args, **forced) -> dict:
    from .experiments import SCENARIOS

    base = None
    if args.scenario:
        if args.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {args.scenario!r}; known: {sorted(SCENARIOS)}")
        base = cfgmod.deep_update({"scenario": args.scenario}, SCENARIOS[args.scenario])
    cfg = cfgmod.load(args.config, args.overrides, base)
    if forced:
        cfg = cfgmod.resolve(cfgmod.deep_update(cfg, forced))
    return cfg


def _out_dir(args, cfg) -> dict:
    out = getattr(args, "out", None) or cfg["output"]["dir"] or str(Path("runs") / cfg["scenario"])
    return cfgmod.resolve(cfgmod.deep_update(cfg, {"output": {"dir": out}}))


# ---------------------------------------------------------------- commands

def cmd_eigen(args) -> int:
    from .eigensolver import doublet_tunneling, fgh_solve
    from .experiments import _model, z_grid

    cfg = _resolve(args)
    grid = z_grid(cfg)
    model = _model(cfg)
    pairs = fgh_solve(grid, model(grid.x), args.n_states)
    print(f"# R={model.R} e_dc={model.e_dc} n_z={grid.n_points}")
    print("# n  energy[hartree]  <z>[bohr]  parity")
    for i, p in enumerate(pairs):
        parity = f"{p.parity:+d}" if p.parity else "0"
        print(f"{i:3d}  {p.energy:.12f}  {p.mean_z:+.6f}  {parity}")
    sym = model.with_tilt(0.0)
    for lvl, name in ((0, "ground"), (1, "first_excited")):
        try:
            rep = doublet_tunneling(sym, grid, lvl)
            print(f"tunneling {name}: splitting={rep.splitting:.6e} hartree "
                  f"t={rep.time_au:.6e} au = {rep.time_fs:.6g} fs")
        except TunnelctlError as exc:
            print(f"tunneling {name}: undefined ({exc})")
    return EXIT_OK


def _summary_line(label, res: dict) -> str:
    return (f"{label}: P_L={res['p_left']:.6f} P_R={res['p_right']:.6f} P_T={res['p_total']:.6f} "
            f"P_target={res['p_target']:.6f} ionization={res['ionization']:.6f} t={res['t_final_fs']:.3f} fs")


def cmd_propagate(args, **forced) -> int:
    from .experiments import run_scenario

    cfg = _out_dir(args, _resolve(args, **forced))
    result = run_scenario(cfg)
    out = cfg["output"]["dir"]
    print(f"# outputs in {out}: trace.dat field.dat manifest.yaml")
    print(_summary_line("final", result.final))
    if result.replay is not None:
        print(_summary_line("replay", result.replay))
    return EXIT_OK


def cmd_lct(args) -> int:
    return cmd_propagate(args, field={"kind": "lct"})


def cmd_sweep(args) -> int:
    from .experiments import run_sweep

    cfg = _out_dir(args, _resolve(args))
    energies = None
    if args.energies:
        try:
            energies = [float(x) for x in args.energies.split(",")]
        except ValueError:
            raise UsageError(f"--energies must be comma-separated numbers, got {args.energies!r}") from None
    result = run_sweep(cfg, branch=args.branch, energies_ev=energies, workers=args.workers)
    out = Path(cfg["output"]["dir"])
    out.mkdir(parents=True, exist_ok=True)
    text = result.to_text()
    (out / f"sweep_{result.branch}.dat").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_husimi(args) -> int:
    from .analysis import husimi
    from .io import read_snapshot

    _resolve(args)  # validates --config/--set; no key is used here
    p_centers = np.arange(args.p_min, args.p_max + 0.5 * args.p_step, args.p_step)
    out_dir = Path(args.out) if args.out else None
    for path in args.snapshots:
        psi, t = read_snapshot(path)
        if isinstance(psi.grid, Grid2D):
            raise UsageError(f"{path}: husimi maps need a 1D snapshot")
        hm = husimi(psi, args.sigma, p_centers=p_centers)
        target = (out_dir / (Path(path).stem + ".husimi.dat")) if out_dir else Path(str(path) + ".husimi.dat")
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(hm.to_text())
        print(f"{path}: t={t * AU_TIME_FS:.3f} fs total={hm.total():.6f} <p>={hm.mean_p():+.6f} -> {target}")
    return EXIT_OK


def cmd_bo_project(args) -> int:
    from .analysis import bo_project, electronic_basis
    from .io import read_snapshot

    cfg = _resolve(args)
    psi, t = read_snapshot(args.snapshot)
    if not isinstance(psi.grid, Grid2D):
        raise UsageError(f"{args.snapshot}: channel analysis needs a 2D snapshot")
    window = None if args.r_min is None and args.r_max is None else (
        -np.inf if args.r_min is None else args.r_min, np.inf if args.r_max is None else args.r_max)
    basis = electronic_basis(psi.grid, args.n_states, window, cfg["geometry"]["softening"],
                             strict=not args.allow_discontinuous)
    dec = bo_project(psi, basis)
    print(f"# t={t * AU_TIME_FS:.3f} fs")
    for k, p in enumerate(dec.populations(), 1):
        print(f"channel {k}: population={p:.6e}")
    if args.n_states >= 4:
        print(f"S34={dec.overlap(2, 3):.6f}")
    if basis.flagged_r:
        print(f"# warning: basis discontinuous at {len(basis.flagged_r)} R values")
    return EXIT_OK


def cmd_curves(args) -> int:
    from .experiments import z_grid
    from .potentials import bo_curves

    cfg = _resolve(args)
    r = np.linspace(args.r_min, args.r_max, args.n_r)
    curves = bo_curves(r, z_grid(cfg), args.n_curves, cfg["geometry"]["softening"])
    text = curves.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tunnelctl", description="Laser-controlled electron tunneling simulator.")
    parser.add_argument("--version", action="version", version=f"tunnelctl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eigen", help="spectrum, localized states and tunneling times")
    _common(p)
    p.add_argument("--n-states", type=int, default=6)
    p.set_defaults(func=cmd_eigen)

    for name, func, text in (("propagate", cmd_propagate, "run one scenario"),
                             ("lct", cmd_lct, "closed-loop (local control) run")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--out", metavar="DIR", help="output directory (overrides output.dir)")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="initial nuclear kinetic energy scans")
    _common(p)
    p.add_argument("--branch", choices=cfgmod.SWEEP_BRANCHES)
    p.add_argument("--energies", metavar="E1,E2,...", help="kinetic energies in eV")
    p.add_argument("--workers", type=int, help="parallel workers (default: QWV_THREADS or 1)")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("husimi", help="phase-space maps of 1D snapshots")
    _common(p)
    p.add_argument("snapshots", nargs="+")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--p-min", type=float, default=-3.0)
    p.add_argument("--p-max", type=float, default=3.0)
    p.add_argument("--p-step", type=float, default=0.05)
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_husimi)

    p = sub.add_parser("bo-project", help="Born-Oppenheimer channel analysis of a 2D snapshot")
    _common(p)
    p.add_argument("snapshot")
    p.add_argument("--n-states", type=int, default=4)
    p.add_argument("--r-min", type=float)
    p.add_argument("--r-max", type=float)
    p.add_argument("--allow-discontinuous", action="store_true")
    p.set_defaults(func=cmd_bo_project)

    p = sub.add_parser("curves", help="Born-Oppenheimer potential curves")
    _common(p)
    p.add_argument("--r-min", type=float, default=1.0)
    p.add_argument("--r-max", type=float, default=30.0)
    p.add_argument("--n-r", type=int, default=59)
    p.add_argument("--n-curves", type=int, default=4)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_curves)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError, CorruptFileError) as exc:
        print(f"tunnelctl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TunnelctlError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"tunnelctl: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"tunnelctl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
