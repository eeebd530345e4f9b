"""Multi-mode guided matter-wave interferometer simulator.

Three levels of description of a double-Y guided-atom interferometer:

* transverse eigenstructure of the guide cross-section (``eigensolver``),
* full 2D time-dependent Schroedinger propagation (``tdse``),
* an analytic per-momentum mode-channel model (``channels``),

plus thermal-ensemble fringe synthesis (``thermal``) and a batch CLI
(``cli``).  All solvers work in natural units (hbar = m = 1, input-guide
trap frequency = 1); SI enters only through :mod:`guidewave.units`.
"""

__version__ = "0.1.0"

from .units import PhysicalParams, NaturalUnits, natural_units, convert
from .geometry import GeometryProfile, separation, well_frequency, potential, adiabaticity_ratio
from .eigensolver import XGrid, TransverseSpectrum, solve_transverse, splitting_gap
from .channels import (
    LongitudinalPacket,
    TransferSettings,
    phase_shift,
    transfer_matrix,
    exit_momentum,
    apply_interferometer,
    evolve_channels,
)
from .thermal import SourceSpec, build_ensemble, interference_pattern, fringe_analysis

__all__ = [
    "PhysicalParams",
    "NaturalUnits",
    "natural_units",
    "convert",
    "GeometryProfile",
    "separation",
    "well_frequency",
    "potential",
    "adiabaticity_ratio",
    "XGrid",
    "TransverseSpectrum",
    "solve_transverse",
    "splitting_gap",
    "LongitudinalPacket",
    "TransferSettings",
    "phase_shift",
    "transfer_matrix",
    "exit_momentum",
    "apply_interferometer",
    "evolve_channels",
    "SourceSpec",
    "build_ensemble",
    "interference_pattern",
    "fringe_analysis",
]
