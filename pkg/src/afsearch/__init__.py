"""Per-layer activation-function architecture search for dense classifiers.

The library trains small fully connected classifiers whose per-layer
activation functions are drawn from a 48-function menu, and searches that
categorical space with uniform random sampling, a Tree-structured Parzen
Estimator, or CMA-ES over a continuous relaxation. Experiment logs feed
permutation-test significance reports and activation-frequency tables.
"""

__version__ = "0.1.0"

from .activations import (
    ActivationKind,
    ActivationState,
    af_backward,
    af_forward,
    af_index,
    af_registry,
    parse_af_name,
)
from .data import DataError, Dataset, Scaler, Split, load_dataset, scaler_fit, scaler_transform, train_test_split
from .experiment import ExperimentConfig, ReplicateRecord, run_experiment, run_replicate, standard_architecture
from .network import Network, TrainConfig, init_network, predict_accuracy, train
from .samplers import CmaEsState, SearchSpace, TpeState, TrialRecord, cmaes_ask, cmaes_init, cmaes_tell, study_run
from .stats import FrequencyTable, af_frequency_table, median, permutation_test_medians, significance_markers
