"""Topology inference for diffusion networks observed through a subset of nodes."""

from netinfer.clustering import (
    Gmm1dParams,
    PredictedAdjacency,
    classify_gmm,
    extract_pair_values,
    fit_gmm_1d,
    infer_topology,
    kmeans_1d,
)
from netinfer.errors import (
    DegenerateDataError,
    IllConditionedError,
    NetInferError,
    ParameterError,
    StabilityError,
    UndefinedMetricError,
)
from netinfer.estimators import (
    EstimatorKind,
    TopologyEstimate,
    estimate,
    granger,
    one_lag,
    residual,
    unbiased_cumulative,
    unbiased_instant,
)
from netinfer.graph import (
    CombinationMatrix,
    generate_ba,
    generate_er,
    laplacian_combination,
    spectral_radius,
)
from netinfer.harness import ExperimentConfig, GraphModel, run_experiment, write_csv
from netinfer.metrics import aggregate, bias_variance, error_rate, fn_score, fp_score, run_metrics
from netinfer.moments import (
    MomentAccumulator,
    SampleMoments,
    accumulate,
    analytic_r0,
    analytic_r0_limit,
    analytic_r1,
    analytic_r3,
    expected_moments,
)
from netinfer.sampling import NoiseSource, ObservationMask, observe, select_observed, simulate_var

__version__ = "0.1.0"
