"""
Pump/dump with moving nuclei.

Letting the internuclear distance R move turns the four-state scheme into
a two-coordinate problem: the pump puts part of the packet on a repulsive
excited curve, so the protons separate while the electron tunnels and the
dump then meets a different geometry. This script prints the
Born-Oppenheimer curves, runs a small 2D four-state propagation and
projects the final state onto the adiabatic electronic channels.

The default grid is deliberately coarse so that the script finishes in a
few minutes; the acceptance runs use 256 x 512 points.
"""
import argparse

import numpy as np

from tunnelctl import Grid1D, bo_curves, bo_project, electronic_basis
from tunnelctl.analysis import mean_internuclear_distance
from tunnelctl.experiments import run_scenario, scenario_config

parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
parser.add_argument("--quick", action="store_true", help="stop after 40 fs")
args = parser.parse_args()

curves = bo_curves(np.arange(2.0, 31.0, 4.0), Grid1D(256, -40.0, 40.0), 4)
print("Born-Oppenheimer curves (hartree):")
print(curves.to_text(), end="")

geometry = {"n_z": 128, "z_min": -40.0, "z_max": 40.0, "n_r": 256, "r_min": 10.0, "r_max": 40.0}
prop = {"absorber_width": 10.0, "snapshot_fs": []}
if args.quick:
    prop["t_final_fs"] = 40.0
cfg = scenario_config("2d-fourstate-kn0", geometry=geometry, propagation=prop)
res = run_scenario(cfg, write=False)
psi = res.psi
f = res.final
print(f"\nfinal: P_L = {f['p_left']:.4f}, P_R = {f['p_right']:.4f}, ionization = {f['ionization']:.4f}, "
      f"<R> = {mean_internuclear_distance(psi):.2f} bohr")

basis = electronic_basis(psi.grid, 4, strict=False)
dec = bo_project(psi, basis)
for k, p in enumerate(dec.populations(), 1):
    print(f"channel {k}: {p:.4f}")
print(f"normalized overlap of channels 3 and 4: {dec.overlap(2, 3):.4f}")
