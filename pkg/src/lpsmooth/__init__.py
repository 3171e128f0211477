"""Smoothed Littlewood-Paley projections and Morrey-Campanato maximal functions.

Submodules:

* :mod:`lpsmooth.signal_core` periodic sampled signals and exact transforms
* :mod:`lpsmooth.profiles` smooth multiplier profiles
* :mod:`lpsmooth.cover` interval bookkeeping for the decomposition
* :mod:`lpsmooth.operators` multiplier banks, ``S``, ``g``, ``Phi``, ``R``, ``H``
* :mod:`lpsmooth.campanato` polynomial window scans and Campanato norms
* :mod:`lpsmooth.kernel_checks` Taylor-corrected kernel decay measurements
* :mod:`lpsmooth.harness` experiments and the ``lpsmooth`` command line
"""

from ._backend import BACKEND
from .errors import (ConfigError, CoverError, DomainError, LPError, ResolutionError,
                     StructuralError)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "CoverError",
    "DomainError",
    "LPError",
    "ResolutionError",
    "StructuralError",
    "__version__",
]
