"""Multiseed Krylov complexity for spin chains and quantum resonant systems.

Builds block Krylov bases with partial reorthogonalization at configurable
precision, evaluates complexity plateaus (operator, state and operator-size
variants) and ships a CLI for reproducible integrable-vs-chaotic comparisons.
"""

from .precision import DOUBLE, HVector, Precision, inner, orthogonality_drift, symmetric_eigen
from .models import (
    FockBlock,
    HamiltonianAction,
    Liouvillian,
    ModelSpec,
    SpectralDecomposition,
    build_ising,
    build_qrs,
    build_xyz,
    enumerate_fock,
    liouvillian_apply,
    spectral,
)
from .seeds import (
    GradedBasis,
    SeedFamily,
    graded_fock_basis,
    graded_pauli_basis,
    seeds_number_operators,
    seeds_product_states,
    seeds_single_site_spins,
    seeds_zero_body,
)
from .lanczos import BlockKrylovBasis, BlockLanczos, LanczosRun, block_lanczos, lanczos
from .complexity import (
    MultiseedKrylovComplexity,
    OperatorSizePlateau,
    PlateauResult,
    TimeSeries,
    c_mult_timeseries,
    normalize_pair,
    phi_coefficients,
    plateau_operator,
    plateau_size,
    plateau_state,
    size_timeseries,
    time_average_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "DOUBLE",
    "HVector",
    "Precision",
    "inner",
    "orthogonality_drift",
    "symmetric_eigen",
    "FockBlock",
    "HamiltonianAction",
    "Liouvillian",
    "ModelSpec",
    "SpectralDecomposition",
    "build_ising",
    "build_qrs",
    "build_xyz",
    "enumerate_fock",
    "liouvillian_apply",
    "spectral",
    "GradedBasis",
    "SeedFamily",
    "graded_fock_basis",
    "graded_pauli_basis",
    "seeds_number_operators",
    "seeds_product_states",
    "seeds_single_site_spins",
    "seeds_zero_body",
    "BlockKrylovBasis",
    "BlockLanczos",
    "LanczosRun",
    "block_lanczos",
    "lanczos",
    "MultiseedKrylovComplexity",
    "OperatorSizePlateau",
    "PlateauResult",
    "TimeSeries",
    "c_mult_timeseries",
    "normalize_pair",
    "phi_coefficients",
    "plateau_operator",
    "plateau_size",
    "plateau_state",
    "size_timeseries",
    "time_average_oracle",
    "__version__",
]
