"""Fixed-architecture networks with a single integer weight.

Certified fixed-point evaluation of fractional parts of integer multiples
of dyadic roots, effective search for the integer weight covering torus
targets, constructive sup-norm approximation of Holder functions, and an
ERM regression harness with convergence-rate studies.
"""

__version__ = "0.1.0"

from .approximator import (
    ApproximationReport,
    build_approximant,
    cell_representatives,
    mesh_size,
    sup_error_grid,
    targets_from_function,
)
from .estimator import KroneckerNetRegressor
from .fixedpoint import (
    PRECISION_CAP,
    FixedPoint,
    InsufficientPrecisionError,
    PrecisionCapError,
    PrecisionError,
    TorusInterval,
    frac_mult_interval,
    nth_root_floor,
    pow2_root,
    required_bits,
)
from .holder import REGISTRY, FunctionBoundError, HolderSpec, TargetFunction, make_function
from .kronecker import (
    SearchConfig,
    SearchNotFound,
    SearchResult,
    TargetVector,
    discrepancy,
    min_weight_oracle,
    search_weight,
    weight_bound,
)
from .network import (
    Cell,
    NetworkParams,
    activation,
    activation_exponent,
    cell_of_index,
    forward,
    forward_batch,
    forward_layerwise,
    grid_index,
    grid_index_batch,
    triangular_block,
    value_table,
)
from .regression import (
    CellStats,
    Dataset,
    ERMConfig,
    RateReport,
    RateRow,
    Schedule,
    cell_statistics,
    covering_log2,
    empirical_risk,
    erm_fit,
    generate_data,
    prediction_error_mc,
    rate_study,
    read_dataset_csv,
    risk_bound,
    schedule,
    write_dataset_csv,
)

__all__ = [
    "ApproximationReport",
    "Cell",
    "CellStats",
    "Dataset",
    "ERMConfig",
    "FixedPoint",
    "FunctionBoundError",
    "HolderSpec",
    "InsufficientPrecisionError",
    "KroneckerNetRegressor",
    "NetworkParams",
    "PRECISION_CAP",
    "PrecisionCapError",
    "PrecisionError",
    "RateReport",
    "RateRow",
    "REGISTRY",
    "Schedule",
    "SearchConfig",
    "SearchNotFound",
    "SearchResult",
    "TargetFunction",
    "TargetVector",
    "TorusInterval",
    "activation",
    "activation_exponent",
    "build_approximant",
    "cell_of_index",
    "cell_representatives",
    "cell_statistics",
    "covering_log2",
    "discrepancy",
    "empirical_risk",
    "erm_fit",
    "forward",
    "forward_batch",
    "forward_layerwise",
    "frac_mult_interval",
    "generate_data",
    "grid_index",
    "grid_index_batch",
    "make_function",
    "mesh_size",
    "min_weight_oracle",
    "nth_root_floor",
    "pow2_root",
    "prediction_error_mc",
    "rate_study",
    "read_dataset_csv",
    "required_bits",
    "risk_bound",
    "schedule",
    "search_weight",
    "sup_error_grid",
    "targets_from_function",
    "triangular_block",
    "value_table",
    "weight_bound",
    "write_dataset_csv",
]
