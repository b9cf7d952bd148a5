"""Numerics for local laws of sparse random matrices."""

from .ensemble import EnsembleConfig, EntryLaw, SampleBundle, sample_er, sample_general_sparse
from .ldp import LargeDeviationBound, LdpInstance, exact_lr_enumerate, monte_carlo_lr
from .resolvent import Resolvent, ResolventBundle, compute_green
from .semicircle import SpectralParam, semicircle_mass, stieltjes_m, zeta_value
from .spectral import EmpiricalSpectralMeasure

__version__ = "0.1.0"

__all__ = [
    "EmpiricalSpectralMeasure",
    "EnsembleConfig",
    "EntryLaw",
    "LargeDeviationBound",
    "LdpInstance",
    "Resolvent",
    "ResolventBundle",
    "SampleBundle",
    "SpectralParam",
    "compute_green",
    "exact_lr_enumerate",
    "monte_carlo_lr",
    "sample_er",
    "sample_general_sparse",
    "semicircle_mass",
    "stieltjes_m",
    "zeta_value",
]
