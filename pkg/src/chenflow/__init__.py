"""Learning control with truncated discrete-time Chen-Fliess series.

The package identifies input-output (or input-error) maps of control
affine plants online, using recursive least squares over iterated-sum
regressors, and closes the loop with a bounded one-step-ahead predictive
controller that can optionally lean on a physical model.
"""

from .words import (
    Alphabet,
    ColoredTree,
    EMPTY_WORD,
    OrderVector,
    Word,
    card_words,
    dagger,
    hasse_tree,
    order_vector,
    preceq,
)
from .chen import (
    ChenState,
    chen_init,
    chen_step,
    evaluate,
    iterated_sum,
    predict_next,
    regressor,
    s_matrix,
    s_matrix_inductive,
)
from .learner import (
    LearnerConfig,
    LearnerState,
    batch_least_squares,
    learn_step,
    learner_init,
    rls_update,
)
from .plant import (
    DiscretizationConfig,
    LotkaVolterraParams,
    PlantModel,
    SimulationBlowUp,
    discretize_input,
    exp_model,
    integrate,
    lv_conserved,
    lv_model,
)
from .control import (
    ControllerConfig,
    ReferenceTrajectory,
    RunReport,
    closed_loop_run,
    make_reference,
    orbit_transfer_reference,
    rms_report,
)
from .estimators import ChenFliessRegressor, IteratedSumTransform

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "Word",
    "EMPTY_WORD",
    "OrderVector",
    "ColoredTree",
    "card_words",
    "order_vector",
    "preceq",
    "hasse_tree",
    "dagger",
    "ChenState",
    "chen_init",
    "chen_step",
    "regressor",
    "evaluate",
    "predict_next",
    "iterated_sum",
    "s_matrix",
    "s_matrix_inductive",
    "LearnerConfig",
    "LearnerState",
    "learner_init",
    "rls_update",
    "learn_step",
    "batch_least_squares",
    "PlantModel",
    "LotkaVolterraParams",
    "DiscretizationConfig",
    "SimulationBlowUp",
    "integrate",
    "discretize_input",
    "lv_model",
    "lv_conserved",
    "exp_model",
    "ControllerConfig",
    "ReferenceTrajectory",
    "RunReport",
    "make_reference",
    "orbit_transfer_reference",
    "closed_loop_run",
    "rms_report",
    "ChenFliessRegressor",
    "IteratedSumTransform",
    "__version__",
]
