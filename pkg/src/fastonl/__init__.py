"""Fast online node labeling with local-push approximations of graph kernels."""

from .baselines import approximate_run, power_iteration_kernel, weighted_majority_run
from .graph import (Graph, GraphFormatError, LabelSequence, from_edges, karate, largest_connected_component,
                    load_dataset, load_edge_list, load_labels, volume, write_edge_list)
from .kernel import (KernelColumn, KernelOperator, KernelSpec, derive_alpha, exact_basic_kernel,
                     exact_kernel_matrix, kernel_column, residual_condition_norm)
from .learner import (ExperimentRecord, admissibility_audit, fastonl_run, project_distribution, relaxation_run,
                      surrogate_gradient, surrogate_loss)
from .push import KernelType, PushConfig, PushOutcome, Pusher, check_linear_invariant, fifo_push, theoretical_bounds

__version__ = "0.1.0"

__all__ = [
    "ExperimentRecord", "Graph", "GraphFormatError", "KernelColumn", "KernelOperator", "KernelSpec", "KernelType",
    "LabelSequence", "PushConfig", "PushOutcome", "Pusher", "admissibility_audit", "approximate_run",
    "check_linear_invariant", "derive_alpha", "exact_basic_kernel", "exact_kernel_matrix", "fastonl_run",
    "fifo_push", "from_edges", "karate", "kernel_column", "largest_connected_component", "load_dataset",
    "load_edge_list", "load_labels", "power_iteration_kernel", "project_distribution", "relaxation_run",
    "residual_condition_norm", "surrogate_gradient", "surrogate_loss", "theoretical_bounds", "volume",
    "weighted_majority_run", "write_edge_list",
]
