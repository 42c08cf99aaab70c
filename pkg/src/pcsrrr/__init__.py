"""Principal-component-guided sparse reduced-rank regression.

A multivariate regression estimator factoring the coefficient matrix as
B = C @ D.T with an orthonormal D, row-sparse C, and a per-group quadratic
penalty that biases the rows toward each group's leading principal
directions.  Includes four comparison estimators, cross-validation, the
synthetic benchmark generators, and evaluation metrics.
"""

from .model import (
    AllZeroBlock,
    BadFoldCount,
    BadPartition,
    DataPair,
    DimensionMismatch,
    EmptyInput,
    EstimatorError,
    FactorPair,
    FitReport,
    GroupPartition,
    Hyperparameters,
    NonDecreasingObjective,
    NonFinite,
    RankTooLarge,
    ZeroCrossProduct,
    center_columns,
    coefficient_matrix,
    scale_columns,
    validate_inputs,
)
from .penalty import GroupSpectrum, PenaltySet, build_penalty, build_penalty_set, group_svd
from .solver import (
    SolverConfig,
    fit,
    init_d,
    objective,
    predict,
    predict_from_report,
    procrustes,
    update_d,
)
from .baselines import (
    BASELINES,
    METHODS,
    baseline_fit,
    errr_fit,
    melastic_fit,
    mlasso_fit,
    srrr_fit,
)
from .model_selection import (
    CvPlan,
    CvResult,
    cross_validate,
    default_lambda_grid,
    default_theta_grid,
    fit_method,
    make_folds,
)
from .metrics import EvalRecord, aggregate, mse_b, mse_y, mspe, tpr_tnr
from .simulate import (
    GroundTruth,
    Scenario,
    gen_grouped,
    gen_signal_block,
    gen_ungrouped,
    generate,
    scenario_grid,
)
from .benchmark import BenchmarkSettings, run_replication, run_simulation

__version__ = "0.1.0"
