"""Desk-scale workbench for variational-quantum and classical reward models.

The package covers the full loop: simulate a small statevector register,
fit circuit or multilayer-perceptron reward models to noisy plant
measurements, swarm-search the trained models per setpoint, and score the
result against fresh ground truth.
"""

from .harness import (
    ExperimentRecord,
    OptimizeSettings,
    TrainConfig,
    TrainingResult,
    build_model,
    classical_cube,
    config_hash,
    expand_grid,
    load_checkpoint,
    load_records,
    normalize_config,
    quantum_cube,
    repeat_train,
    run_experiment,
    save_checkpoint,
    save_record,
    select_top_k,
    sweep,
    train,
)
from .mlp import MlpConfig, MlpModel
from .optimize import (
    OptimizationResult,
    PsoConfig,
    dataset_best,
    ground_truth_eval,
    pso_optimize,
    rog,
    run_optimization,
)
from .pipeline import Preprocessor, SplitDataset, prepare_dataset, split_samples
from .plant import (
    GridSample,
    collect_grid,
    load_dataset,
    make_state,
    noise_free_fitness,
    run_protocol,
    save_dataset,
    step,
    true_optimum,
)
from .report import generate_report
from .statevector import CircuitSpec, GateOp, init_zero, run_circuit
from .util import NumericError, derive_seed, stream
from .vqc import VqcConfig, VqcModel, VqcParams

__version__ = "0.1.0"

__all__ = [
    "CircuitSpec",
    "ExperimentRecord",
    "GateOp",
    "GridSample",
    "MlpConfig",
    "MlpModel",
    "NumericError",
    "OptimizationResult",
    "OptimizeSettings",
    "Preprocessor",
    "PsoConfig",
    "SplitDataset",
    "TrainConfig",
    "TrainingResult",
    "VqcConfig",
    "VqcModel",
    "VqcParams",
    "build_model",
    "classical_cube",
    "collect_grid",
    "config_hash",
    "dataset_best",
    "derive_seed",
    "expand_grid",
    "generate_report",
    "ground_truth_eval",
    "init_zero",
    "load_checkpoint",
    "load_dataset",
    "load_records",
    "make_state",
    "noise_free_fitness",
    "normalize_config",
    "prepare_dataset",
    "pso_optimize",
    "quantum_cube",
    "repeat_train",
    "rog",
    "run_circuit",
    "run_experiment",
    "run_optimization",
    "run_protocol",
    "save_checkpoint",
    "save_dataset",
    "save_record",
    "select_top_k",
    "split_samples",
    "step",
    "stream",
    "sweep",
    "train",
    "true_optimum",
    "__version__",
]
