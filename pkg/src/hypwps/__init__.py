"""Harmonic analysis on the hyperbolic plane: Wigner and Patterson-Sullivan pairings.

The headline check is ``W ~ c r^{-1/2} PS`` with ``c = sqrt(2/pi) e^{-i pi/4}``.
"""

from .boundary import (
    KERNEL_EXPONENT,
    BoundaryFunction,
    SpectralPair,
    compact_bump,
    constant,
    fourier,
    poisson_transform,
    vonmises_bump,
)
from .calibration import ConstantsRecord, calibrate, calibrate_haar
from .cylinder import CylinderModel, cutoff_independence, gamma_average, make_cutoff
from .errors import (
    BoundaryProximity,
    DegeneratePair,
    DomainError,
    EmptySupport,
    FitFailure,
    FixedPointSupport,
    ForbiddenParameter,
    HypError,
    InsufficientData,
    NoiseFloor,
    NonConvergence,
    TruncationTooSmall,
)
from .harness import ExperimentConfig, SweepRow, emit, fit_remainder, run_sweep
from .lie_kernel import BoundaryPoint, GroupElement, IwasawaCoords, iwasawa
from .pairings import (
    HAAR_EXPONENT,
    PS_NORMALIZATION,
    PairingResult,
    PhaseSpaceTest,
    Resolution,
    ps_product,
    ps_radon,
    quasi_invariance_profile,
    wigner,
    wigner_via_op,
)
from .transforms import C_LEADING, intertwine, intertwine_leading, iwasawa_bump

__version__ = "0.1.0"
