"""Bottom-up recovery of linear Gaussian DAGs from precision matrices."""
from .build import BuildConfig, BuildFailedError, BuildResult, run_build
from .dag import (
    UndirectedGraph,
    WeightedDag,
    chain_dag,
    children,
    leaves,
    moralize,
    parents,
    sample_er_dag,
    topological_order,
    validate,
)
from .estimation import EstimatorSpec, estimate_precision, restrict, sample_covariance
from .metrics import MetricReport, evaluate, fdr_tpr, nmse, shd
from .sem import (
    DataMatrix,
    NoiseModel,
    PrecisionMatrix,
    condition_number,
    ensemble_covariance,
    ensemble_precision,
    resolution_gap,
    sample_data,
    theta_entry,
)

__version__ = "0.1.0"
