"""Conductive-boundary transmission eigenvalues on the unit disk and sphere.

Submodules: ``specfun`` (Bessel/Hankel functions), ``rootfind`` (zeros in
rectangles), ``dispersion`` (determinants and eigenvalues), ``eigenpairs``
(eigenfunctions), ``forward`` (modal scattering), ``recon`` (conductivity
recovery), ``iod`` (phase-based eigenvalue detection) and ``cli``.
"""

__version__ = "0.1.0"

from .dispersion import EigenvalueRecord, Medium, compute_ites, d_disk, d_sphere, eoc_sequence
from .forward import NearFieldDataset, farfield_operator_eigs, lsm_gnorm, synth_nearfield
from .iod import InsideOutsideDuality, detect_ites, phase_curves
from .recon import ConductivityReconstructor, dtn_map, recover_eta
from .rootfind import SearchRect, count_zeros, find_zeros

__all__ = [
    "__version__",
    "Medium",
    "EigenvalueRecord",
    "SearchRect",
    "count_zeros",
    "find_zeros",
    "d_sphere",
    "d_disk",
    "compute_ites",
    "eoc_sequence",
    "NearFieldDataset",
    "farfield_operator_eigs",
    "synth_nearfield",
    "lsm_gnorm",
    "phase_curves",
    "detect_ites",
    "InsideOutsideDuality",
    "dtn_map",
    "recover_eta",
    "ConductivityReconstructor",
]
