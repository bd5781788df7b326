"""Polynomial Gaussian-kernel calculus for a flat fibered model.

The package is organised bottom-up:

- ``poly``      four-family polynomial coefficients with matrix fibers
- ``kernels``   the four numerator-times-Gaussian kernel families and ladder ops
- ``compose``   closed-form operator composition on those families
- ``oracle``    Gauss-Hermite quadrature cross-checks and norm estimation
- ``operators`` symbols, leading-term contractions, model multiplication ops
- ``geometry``  curvature-sample data model and comparison constants
- ``cli``       file-based command line (``fockcalc`` entry point)
"""

from .poly import (
    DEFAULT_DEGREE_CAP,
    DegreeOverflowError,
    Dims,
    VarId,
    Poly,
    poly_arith,
    O_Z,
    O_ZB,
    O_ZP,
    O_ZBP,
    var_offset,
    var_name,
    parse_var_name,
)
from .kernels import (
    Bergman,
    OrthBergman,
    Extension,
    Restriction,
    KernelKind,
    KernelExpr,
    ScaledKernel,
    unit_expr,
    kernel_eval,
    kernel_expr_eval,
    apply_ladder,
    apply_model_laplacian,
    kind_name,
    kind_from_json,
    unprimed_dim,
    primed_dim,
    cross_count,
)
from .compose import (
    ComposePlan,
    UnsupportedCompositionError,
    base_terms,
    k_base_exact,
    k_base,
    k_nm,
    k_prime_nm,
    k_ep,
    k_e,
    compose,
    compose_plan,
)
from .oracle import (
    InsufficientNodesError,
    QuadGrid,
    OracleReport,
    FockIndex,
    fock_indices,
    gauss_hermite,
    gaussian_moment,
    fock_norm,
    default_eval_points,
    oracle_compose_values,
    oracle_compose,
    laplacian_eigencheck,
    gaussian_pairing,
    norm_estimate,
)
from .operators import (
    Symbol,
    CutoffSpec,
    IDENTITY_CUTOFF,
    BracketField,
    MOpField,
    HgpResult,
    DefectRecord,
    TOEPLITZ_KINDS,
    rotate_symbol,
    lambda_eq,
    lambda_h,
    lambda_a,
    lambda_eq_quadrature,
    lambda_h_quadrature,
    lambda_a_quadrature,
    bracket,
    m_op,
    h_gp,
    c1_c2,
    toeplitz_leading,
    toeplitz_flat_composite,
    toeplitz_predicted_kernel,
    flat_defect_checks,
)
from .geometry import (
    GEOM_SCHEMA,
    NormalDirection,
    GeometrySample,
    GeometryData,
    ConstantResult,
    C3C4Result,
    hermitian_eigs,
    c0,
    c3_c4,
    dp3,
    tower_dp3,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # poly
    "DEFAULT_DEGREE_CAP",
    "DegreeOverflowError",
    "Dims",
    "VarId",
    "Poly",
    "poly_arith",
    "O_Z",
    "O_ZB",
    "O_ZP",
    "O_ZBP",
    "var_offset",
    "var_name",
    "parse_var_name",
    # kernels
    "Bergman",
    "OrthBergman",
    "Extension",
    "Restriction",
    "KernelKind",
    "KernelExpr",
    "ScaledKernel",
    "unit_expr",
    "kernel_eval",
    "kernel_expr_eval",
    "apply_ladder",
    "apply_model_laplacian",
    "kind_name",
    "kind_from_json",
    "unprimed_dim",
    "primed_dim",
    "cross_count",
    # compose
    "ComposePlan",
    "UnsupportedCompositionError",
    "base_terms",
    "k_base_exact",
    "k_base",
    "k_nm",
    "k_prime_nm",
    "k_ep",
    "k_e",
    "compose",
    "compose_plan",
    # oracle
    "InsufficientNodesError",
    "QuadGrid",
    "OracleReport",
    "FockIndex",
    "fock_indices",
    "gauss_hermite",
    "gaussian_moment",
    "fock_norm",
    "default_eval_points",
    "oracle_compose_values",
    "oracle_compose",
    "laplacian_eigencheck",
    "gaussian_pairing",
    "norm_estimate",
    # operators
    "Symbol",
    "CutoffSpec",
    "IDENTITY_CUTOFF",
    "BracketField",
    "MOpField",
    "HgpResult",
    "DefectRecord",
    "TOEPLITZ_KINDS",
    "rotate_symbol",
    "lambda_eq",
    "lambda_h",
    "lambda_a",
    "lambda_eq_quadrature",
    "lambda_h_quadrature",
    "lambda_a_quadrature",
    "bracket",
    "m_op",
    "h_gp",
    "c1_c2",
    "toeplitz_leading",
    "toeplitz_flat_composite",
    "toeplitz_predicted_kernel",
    "flat_defect_checks",
    # geometry
    "GEOM_SCHEMA",
    "NormalDirection",
    "GeometrySample",
    "GeometryData",
    "ConstantResult",
    "C3C4Result",
    "hermitian_eigs",
    "c0",
    "c3_c4",
    "dp3",
    "tower_dp3",
]
