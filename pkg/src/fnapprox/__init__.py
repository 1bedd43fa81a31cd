"""1-D function approximation with constant-padding input expansion.

Benchmarks on [0, 2*pi], a from-scratch tanh MLP with analytic
backpropagation, an L-BFGS optimizer with strong Wolfe line search, and
an experiment harness that measures how the expansion changes
convergence speed and final accuracy.
"""

from .benchmarks import (
    BenchmarkId,
    Category,
    Dataset,
    evaluate,
    sample_test,
    sample_train,
)
from .expansion import ConstantScheme, ExpansionConfig, expand, expand_dataset
from .harness import (
    MODEL_CONFIGS,
    RunResult,
    RunSpec,
    SuiteReport,
    aggregate_by_category,
    convergence_rate,
    iterations_to_target,
    mse_improvement,
    run_constant_ablation,
    run_dimension_ablation,
    run_experiment,
)
from .lbfgs import LbfgsConfig, StopReason, minimize, strong_wolfe_search
from .mlp import (
    MlpArchitecture,
    MlpModel,
    forward,
    forward_batch,
    init_xavier,
    loss_and_grad,
    param_count,
    permute_hidden_neurons,
)
from .rng import Prng, derive_seed

__version__ = "0.1.0"

__all__ = [
    "BenchmarkId",
    "Category",
    "ConstantScheme",
    "Dataset",
    "ExpansionConfig",
    "LbfgsConfig",
    "MODEL_CONFIGS",
    "MlpArchitecture",
    "MlpModel",
    "Prng",
    "RunResult",
    "RunSpec",
    "StopReason",
    "SuiteReport",
    "aggregate_by_category",
    "convergence_rate",
    "derive_seed",
    "evaluate",
    "expand",
    "expand_dataset",
    "forward",
    "forward_batch",
    "init_xavier",
    "iterations_to_target",
    "loss_and_grad",
    "minimize",
    "mse_improvement",
    "param_count",
    "permute_hidden_neurons",
    "run_constant_ablation",
    "run_dimension_ablation",
    "run_experiment",
    "sample_test",
    "sample_train",
    "strong_wolfe_search",
]
