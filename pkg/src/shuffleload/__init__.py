"""Shuffle-phase network load modelling for fixed-input MapReduce jobs.

Profile (or simulate) a job over a grid of map/reduce task counts, fit a
per-parameter polynomial by least squares, predict unseen configurations and
score the predictions.
"""
from ._backend import BACKEND
from .errors import *  # noqa: F401,F403
from .ingest import (
    NetRateSample,
    ShuffleWindow,
    aggregate_runs,
    integrate_window,
    parse_measurements_csv,
    parse_net_rate_log,
    serialize_measurements_csv,
)
from .metrics import EvaluationReport, evaluate, mape, pred25, r_squared, rmse
from .model import (
    DesignMatrix,
    Observation,
    ParameterVector,
    PolynomialModel,
    ProfileDataset,
    build_design_matrix,
    fit,
    load_model,
    predict,
    save_model,
)
from .records import RunRecord
from .simulator import (
    PRESETS,
    ClusterSpec,
    WorkloadProfile,
    run_profile_grid,
    sample_unseen_configs,
    simulate_shuffle,
)

__version__ = "0.1.0"
