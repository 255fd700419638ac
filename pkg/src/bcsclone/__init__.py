"""Cloning and discrimination of binary coherent states.

Submodules: :mod:`fock` (truncated number basis), :mod:`gaussian` (phase-space
calculus), :mod:`alphabet` (two-dimensional descriptions), :mod:`discrimination`,
:mod:`cloners`, :mod:`optimize`, :mod:`analysis` and :mod:`cli`.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BCSCloneError,
    ConfigError,
    ConvergenceError,
    DegenerateBasis,
    DimensionMismatch,
    GridMismatch,
    GridTooSmall,
    MixedStateUnsupported,
    NonPhysical,
    NonPhysicalCovariance,
    TruncationError,
)
