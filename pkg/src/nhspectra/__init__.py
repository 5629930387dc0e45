"""Continued-fraction spectra, singular values and exceptional points of
tridiagonal non-Hermitian operators."""
from .cf_matrix import (
    block_factor_check,
    mcf_recurrence,
    singular_values_mcf,
    two_sided_green,
    TwoSidedModel,
)
from .cf_scalar import (
    cf_recurrence,
    cf_tail_limit,
    det_tridiagonal,
    fixed_point_analysis,
    ufl_factorize,
)
from .errors import NHSpectraError
from .hermitize import (
    block_tridiagonalize,
    hermitized_pencil,
    interleave_permutation,
    singular_values_direct,
)
from .model import (
    BoseHubbard,
    Custom,
    NonBH5,
    TridiagonalOperator,
    UnconventionalBH,
    build_bose_hubbard,
    build_nonbh5,
    build_ubh,
    parse_model_spec,
)
from .spectral import diagonalizability_check, eigenvalues_dense, ep_scan, verify_pole

__version__ = "0.1.0"
