"""Recklessness-regularized Bernoulli matrix factorization.

Probabilistic collaborative filtering whose training objective trades the
variance of the predicted rating distributions against likelihood, plus the
machinery around it: reliability-thresholded evaluation, a PMF regression
baseline, and NSGA-II hyperparameter search over (1 - MAE, coverage).
"""

from .bemf import BemfRecommender, TrainReport, bemf_cost, bemf_cost_gradients, sgd_epoch
from .data import (
    DataSplit,
    FoldAssignment,
    RatingsMatrix,
    ScoreScale,
    kfold,
    load_canonical_csv,
    load_delimited,
    load_delimited_pair,
    random_split,
)
from .distributions import (
    Prediction,
    RatingDistribution,
    expectation,
    mode_and_reliability,
    sigmoid,
    softmax_of_sigmoid,
    variance,
)
from .exceptions import (
    ConfigurationError,
    DataError,
    DivergenceError,
    DuplicateRatingError,
    ParseError,
    ReckmfError,
    ScoreNotInScaleError,
)
from .metrics import (
    AggregateScore,
    PredictionRecord,
    ThresholdCurve,
    aggregate,
    aggregate_weights,
    evaluate,
    predict_testset,
    threshold_grid,
    thresholded_metrics,
)
from .pareto import (
    ObjectivePoint,
    crowding_distance,
    dominates,
    hypervolume_2d,
    non_dominated_sort,
    pareto_front,
)
from .pmf import PmfRecommender, grid_search, pmf_cost, pmf_cost_gradients
from .search import (
    EvaluatedIndividual,
    GaConfig,
    GeneSpec,
    GenomeSpace,
    bemf_genome_space,
    cv_fitness,
    front_test_points,
    nsga2_run,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateScore",
    "BemfRecommender",
    "ConfigurationError",
    "DataError",
    "DataSplit",
    "DivergenceError",
    "DuplicateRatingError",
    "EvaluatedIndividual",
    "FoldAssignment",
    "GaConfig",
    "GeneSpec",
    "GenomeSpace",
    "ObjectivePoint",
    "ParseError",
    "PmfRecommender",
    "Prediction",
    "PredictionRecord",
    "RatingDistribution",
    "RatingsMatrix",
    "ReckmfError",
    "ScoreNotInScaleError",
    "ScoreScale",
    "ThresholdCurve",
    "TrainReport",
    "aggregate",
    "aggregate_weights",
    "bemf_cost",
    "bemf_cost_gradients",
    "bemf_genome_space",
    "crowding_distance",
    "cv_fitness",
    "dominates",
    "evaluate",
    "expectation",
    "front_test_points",
    "grid_search",
    "hypervolume_2d",
    "kfold",
    "load_canonical_csv",
    "load_delimited",
    "load_delimited_pair",
    "mode_and_reliability",
    "non_dominated_sort",
    "nsga2_run",
    "pareto_front",
    "pmf_cost",
    "pmf_cost_gradients",
    "predict_testset",
    "random_split",
    "sgd_epoch",
    "sigmoid",
    "softmax_of_sigmoid",
    "threshold_grid",
    "thresholded_metrics",
    "variance",
]
