"""Block-matrix computations for Toeplitz and Hankel operators on harmonic
Bergman spaces of the unit ball."""

__version__ = "0.1.0"

from .polynomial import Polynomial, fischer_product, monomials
from .harmonic_basis import (
    BASIS_CONVENTION,
    HarmonicBlockBasis,
    build_block_basis,
    dim_harmonic,
    harmonic_decompose,
    harmonic_projection,
    sphere_monomial_moment,
)
from .radial_measure import RadialMeasure, RadialProfile, gamma_sequence, radial_eigenvalue
from .symbols import SymbolSpec, extend_boundary_symbol
from .bergman_operator import (
    BlockOperator,
    KernelDiagonal,
    assemble_hankel,
    assemble_toeplitz,
    bergman_inner_product,
    project_Q,
)
from .spectral_diagnostics import (
    DecayCertificate,
    SectionSpectrum,
    block_norm_decay,
    commutator_decay,
    compactness_limit_test,
    essential_norm_estimate,
    finite_section_spectrum,
    radial_limit_test,
)
