"""viewguard: keep classification performance safe when a new feature view arrives.

Two stages. Adaptation upgrades each existing view-1 classifier with a kernel
regressor on the new view under a capped multi-class hinge loss, using only
the classifier's decision values (never its features). Integration merges the
adapted predictions by maximizing a worst-case security margin over surrogate
ground truths; under a checkable condition the result is provably no worse
than the best original classifier.
"""

from .adaptation import (
    AdaptedModel,
    AStageState,
    adapt_classifier,
    objective_value,
    predict_adapted,
)
from .baselines import (
    BaselineSpec,
    DecisionMatrix,
    LabelMatrix,
    decision_values,
    fit_baseline,
    harden_decisions,
    load_external_predictions,
)
from .evaluation import (
    SplitPlan,
    TTestResult,
    accuracy,
    cross_validate_lambda,
    f_score,
    make_splits,
    paired_t_test,
)
from .exceptions import (
    InputError,
    ParseError,
    SolverError,
    TrainingError,
    ViewguardError,
)
from .integration import (
    IntegrationProblem,
    IntegrationSolution,
    compute_surrogate_radii,
    harden_soft_labels,
    integrate,
    solve_secure_program,
    solver_backend,
    vectorize_labels,
)
from .numerics import (
    GramMatrix,
    KernelSpec,
    cross_gram,
    gram_matrix,
    regularized_solve,
    simplex_projection,
)
from .security import (
    SecurityReport,
    build_security_report,
    check_condition,
    security_distances,
)

__version__ = "0.1.0"

__all__ = [
    "AStageState",
    "AdaptedModel",
    "BaselineSpec",
    "DecisionMatrix",
    "GramMatrix",
    "InputError",
    "IntegrationProblem",
    "IntegrationSolution",
    "KernelSpec",
    "LabelMatrix",
    "ParseError",
    "SecurityReport",
    "SolverError",
    "SplitPlan",
    "TTestResult",
    "TrainingError",
    "ViewguardError",
    "accuracy",
    "adapt_classifier",
    "build_security_report",
    "check_condition",
    "compute_surrogate_radii",
    "cross_gram",
    "cross_validate_lambda",
    "decision_values",
    "f_score",
    "fit_baseline",
    "gram_matrix",
    "harden_decisions",
    "harden_soft_labels",
    "integrate",
    "load_external_predictions",
    "make_splits",
    "objective_value",
    "paired_t_test",
    "predict_adapted",
    "regularized_solve",
    "security_distances",
    "simplex_projection",
    "solve_secure_program",
    "solver_backend",
    "vectorize_labels",
]
