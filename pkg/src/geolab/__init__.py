"""geolab: Schatten-norm geometry toolkit.

Lewis-type bases for matrix subspaces, certified low-distortion maps
between Schatten classes, recursive diamond/Laakso graph metrics with
cut-based l1 embeddings, and exact Markov 2-convexity evaluation, plus a
CLI that assembles these into dimension lower-bound certificates.
"""

from .convexity import (
    ChainSpec,
    ConvexityReport,
    diamond_convexity_ratio,
    impossibility_certificate,
    laakso_canonical_chain,
    markov_convexity_ratio,
    mc_markov_convexity_ratio,
)
from .embedding import (
    DistortionCertificate,
    EmbeddingMap,
    SchattenEmbedding,
    Truncation,
    beta_bound_check,
    build_embedding,
    certify_lower,
    certify_upper,
    theorem_bound,
    truncate_subspace,
)
from .errors import (
    CollapsedPair,
    DegenerateBasis,
    DimensionMismatch,
    Disconnected,
    GeolabError,
    InvalidChain,
    InvalidExponent,
    InvalidExponents,
    NoConvergence,
    NonFiniteInput,
    NotAMartingale,
    NotInSubspace,
    NotPsd,
    OrderViolated,
    SampleTooSmall,
    SingularCoefficient,
    TooLarge,
)
from .graphs import (
    CoordinateEmbedding,
    FiniteMetric,
    LevelGraph,
    diamond,
    distortion,
    export_edge_list,
    hypercube_metric,
    is_series_parallel,
    l1_embed,
    laakso,
    pairwise_l1,
    shortest_path_metric,
)
from .inequalities import (
    ball_convexity_check,
    clarkson_check,
    enflo_type_check,
    hypercube_lower_bound,
    martingale_cotype_check,
    roundness_check,
)
from .lewis import (
    LewisBasis,
    LewisCertificate,
    SolverConfig,
    SubspaceBasis,
    certify_lewis,
    grad_psi,
    lambda_of,
    lambda_squared,
    psi,
    solve_lewis,
)
from .matio import (
    format_matrix_text,
    matrix_from_json_dict,
    matrix_to_json_dict,
    parse_matrix_text,
    read_matrix_json,
    read_matrix_text,
    write_matrix_json,
    write_matrix_text,
)
from .spectral import (
    SpectralForm,
    holder_check,
    holder_exponent,
    loewner_contraction_check,
    operator_norm,
    psd_eigh,
    psd_leq,
    schatten_norm,
    schatten_norm_stack,
    singular_values,
    svd,
    sym_power,
    von_neumann_check,
)

__version__ = "0.1.0"

__all__ = [
    "ChainSpec",
    "CollapsedPair",
    "ConvexityReport",
    "CoordinateEmbedding",
    "DegenerateBasis",
    "DimensionMismatch",
    "Disconnected",
    "DistortionCertificate",
    "EmbeddingMap",
    "FiniteMetric",
    "GeolabError",
    "InvalidChain",
    "InvalidExponent",
    "InvalidExponents",
    "LevelGraph",
    "LewisBasis",
    "LewisCertificate",
    "NoConvergence",
    "NonFiniteInput",
    "NotAMartingale",
    "NotInSubspace",
    "NotPsd",
    "OrderViolated",
    "SampleTooSmall",
    "SchattenEmbedding",
    "SingularCoefficient",
    "SolverConfig",
    "SpectralForm",
    "SubspaceBasis",
    "TooLarge",
    "Truncation",
    "ball_convexity_check",
    "beta_bound_check",
    "build_embedding",
    "certify_lewis",
    "certify_lower",
    "certify_upper",
    "clarkson_check",
    "diamond",
    "diamond_convexity_ratio",
    "distortion",
    "enflo_type_check",
    "export_edge_list",
    "format_matrix_text",
    "grad_psi",
    "holder_check",
    "holder_exponent",
    "hypercube_lower_bound",
    "hypercube_metric",
    "impossibility_certificate",
    "is_series_parallel",
    "l1_embed",
    "laakso",
    "laakso_canonical_chain",
    "lambda_of",
    "lambda_squared",
    "loewner_contraction_check",
    "markov_convexity_ratio",
    "martingale_cotype_check",
    "matrix_from_json_dict",
    "matrix_to_json_dict",
    "mc_markov_convexity_ratio",
    "operator_norm",
    "pairwise_l1",
    "parse_matrix_text",
    "psd_eigh",
    "psd_leq",
    "psi",
    "read_matrix_json",
    "read_matrix_text",
    "roundness_check",
    "schatten_norm",
    "schatten_norm_stack",
    "shortest_path_metric",
    "singular_values",
    "solve_lewis",
    "svd",
    "sym_power",
    "theorem_bound",
    "truncate_subspace",
    "von_neumann_check",
    "write_matrix_json",
    "write_matrix_text",
]
