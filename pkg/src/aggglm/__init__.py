"""Generalized linear models fitted from order-statistic and histogram aggregates."""

from .aggregation import (
    AggregateSummary,
    Block,
    OrderStatisticConstraint,
    SummaryValidationError,
    histogram_to_constraints,
    recovered_histogram,
    summarize_blocks,
    summarize_targets,
    validate_summary,
)
from .glm import (
    ConvergenceError,
    GlmFamily,
    bregman_divergence,
    fit_glm,
    link_inverse,
    predict_means,
)
from .imputation import SortedView, impute_sorted, impute_targets, sorted_view
from .inference import (
    PermutationTestResult,
    SweepResult,
    evaluate_error,
    granularity_sweep,
    permutation_test,
)
from .simulate import SimulationConfig, simulate_glm
from .solver import FitOptions, FitState, alternate_fit, initialize_targets

__version__ = "0.1.0"
