"""Bessel-type series and Monte Carlo integrals on low-rank symmetric cones."""

from .algebra import (
    AlgebraDescriptor,
    Element,
    PeirceSplit,
    SpectralDecomposition,
    char_coeffs,
    corner_idempotent,
    det,
    det_rho,
    diag_unit,
    embed_rank2,
    element_from_json,
    element_to_json,
    from_diag,
    from_matrix,
    half_space_basis,
    in_cone,
    inner,
    inverse,
    jordan_mul,
    peirce_split,
    quadratic_rep,
    random_cone_element,
    random_element,
    restrict_rank2,
    rho_apply,
    rho_matrix,
    spectral,
    sqrt_cone,
    to_matrix,
    trace,
    unit,
    zero,
)
from .cone_integral import (
    ConeSample,
    McEstimate,
    boundary_positivity_scan,
    gamma_cone,
    gamma_cone_mc,
    gaussian_half_space_integral,
    k3_boundary_direct,
    k3_boundary_semi_analytic,
    k_integral_mc,
    sample_cone,
    triangular_map_jacobian,
)
from .errors import (
    AlgebraMismatchError,
    ConeBesselError,
    DomainError,
    IllConditionedPointError,
    NoConvergenceError,
    NonGenericParameterError,
    SingularElementError,
    UnsupportedAlgebraError,
    UsageError,
)
from .series import (
    CoefficientTable,
    EvalResult,
    SeriesParams,
    SymmetricPoint,
    coeffs3,
    elem_sym,
    j2,
    j3,
    j_solution,
    k2_coeffs,
    k2_series,
    k3_series,
    muirhead_residual,
    muirhead_residuals,
    on_eigenvalues,
    pochhammer,
    z_residual,
    z_residuals,
)
from .verify import CheckResult, registry_names, report_json, run_check, run_suite

__version__ = "0.1.0"
