"""Robust semi-supervised node classification under label noise.

Random-walk label aggregation scores the reliability of each training
label; the scores reweight the cross entropy, propose corrected labels,
and a class-prior KL term keeps the corrections from drifting. Backbone
is a two-layer GCN trained with a minimal reverse-mode autodiff engine.
"""

from .aggregation import (AggregationResult, SupportSet, aggregate,
                          aggregate_anchors, build_support_set)
from .data import (BundleError, SbmSpec, generate_sbm, load_bundle,
                   write_bundle)
from .experiments import ExperimentSpec, ResultsTable, run_experiment, run_sweep
from .gcn import (ForwardState, GcnParams, TrainHyper, forward, glorot_init,
                  load_params, save_params)
from .graph import (Graph, NormalizedAdjacency, WalkConfig, collect_context,
                    normalize_adjacency, random_walk)
from .losses import (PriorDistribution, combined_loss, correction_loss,
                     gce_loss, prior_kl_loss, reweighted_loss,
                     standard_ce_loss)
from .noise import (CorruptedLabels, TransitionMatrix, build_transition,
                    corrupt_labels, write_flip_log)
from .optim import Adam, adam_step
from .training import (METHODS, EpochRecord, RunResult, TrainConfig,
                       TrainingDiverged, evaluate, micro_f1, train)

__version__ = "0.1.0"
