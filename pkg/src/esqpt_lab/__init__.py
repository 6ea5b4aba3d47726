"""Numerical laboratory for collective atom-field models.

Semiclassical density of states, exact spectra, and excited-state
phase structure of the Tavis-Cummings (delta=0) and Dicke (delta=1)
models at finite system size.
"""

from .params import ModelParams, critical_coupling, scaled_energy, unscale

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "critical_coupling",
    "scaled_energy",
    "unscale",
    "__version__",
]
