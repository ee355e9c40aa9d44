"""Numerical toolkit for factorizing 1-D Schrodinger operators and building
strictly isospectral potential families, with direct verification of the
spectral and operator identities involved."""

from .errors import (
    AbrahamMosesLimitError,
    BrokenSupersymmetryError,
    DomainTruncationWarning,
    EigensolverError,
    IsospecError,
    PurseyLimitError,
    QuadratureWarning,
    SingularParameterError,
    TableFormatError,
    WindowTooSmallError,
)
from .family import (
    DeformationChain,
    DeformationStep,
    chain_deform,
    deformed_potential,
    excluded_interval,
    normalization_constant,
    psi_lambda,
    reconstruct_potential_from_mode,
)
from .grids import (
    Grid1D,
    GridFunction,
    cumulative_integral,
    derivative,
    integrate,
    l2_norm,
    make_grid,
    second_derivative,
)
from .riccati import (
    RiccatiInstance,
    general_darboux_term,
    riccati_general_solution,
    riccati_residual,
)
from .solver import (
    IsospectralComparison,
    SpectrumReport,
    TridiagonalOperator,
    ZeroMode,
    build_hamiltonian,
    ground_state,
    lowest_eigenpairs,
    verify_isospectral,
    zero_mode_residual,
)
from .susy import (
    PartnerPair,
    Superpotential,
    apply_A,
    apply_A_dagger,
    apply_T1,
    apply_T1_dagger,
    apply_T_minus_lambda,
    apply_T_plus_lambda,
    fermionic_zero_mode,
    general_zero_mode_minus,
    partner_potential,
    partner_potential_full,
    second_solution_minus,
    second_solution_plus,
    superpotential_from_mode,
)

__version__ = "0.1.0"
