"""
tunnelctl: laser-controlled electron tunneling between two protons.

Spectral propagation of the time-dependent Schroedinger equation on
soft-core Coulomb potentials, with fixed nuclei (1D) or an explicit
internuclear coordinate (2D), local-control and pump/dump fields, and the
observables used to analyze the transfer.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .grid import (  # noqa: F401
    AU_TIME_FS,
    HARTREE_EV,
    PROTON_MASS,
    Grid1D,
    Grid2D,
    WaveFunction,
    au_to_fs,
    expectation,
    fourier_forward,
    fourier_inverse,
    fs_to_au,
    gaussian,
    inner_product,
    momentum_expectation,
)
from .potentials import PotentialModel, barrier_info, bo_curves, soft_core_1d, soft_core_2d  # noqa: F401
from .eigensolver import (  # noqa: F401
    doublet_tunneling,
    fgh_energies,
    fgh_solve,
    localized_pair,
    tunneling_time,
)
from .propagator import ObservableTrace, PropagationConfig, SplitOperator, propagate  # noqa: F401
from .control import (  # noqa: F401
    ControlPolicy,
    PulseSequence,
    PulseSpec,
    RecordedField,
    boost,
    four_state_levels,
    four_state_schedule,
    lct_field,
    pi_pulse_amplitude,
    seed_initial_state,
)
from .analysis import (  # noqa: F401
    bo_project,
    domain_populations,
    electronic_basis,
    husimi,
    ionization_yield,
    target_projection,
)
