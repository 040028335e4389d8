"""Online influence maximization with degree-only feedback on sparse random graphs.

The library couples three layers:

* random-graph models (stochastic block models, Chung-Lu) with spectral
  criticality classification and exact-distribution samplers;
* a branching-process oracle supplying expected component sizes and survival
  probabilities, used as ground truth for quantile-regret evaluation;
* degree-feedback UCB bandit policies and an experiment runner producing
  reproducible regret traces.
"""

from .bandit import (ArmStats, DUcbState, EpochRecord, EpochSchedule,
                     PullRecord, exploration_threshold, kl_poisson, run_ducb,
                     run_ducb_double, select_arm, subsample_size, ucb_index,
                     update)
from .branching import (CAP_EXCEEDED, BranchingSolution, CapExceeded,
                        expected_total_progeny, mean_offspring, phi,
                        predicted_component_mean, simulate_total_progeny,
                        solve_branching, survival_probabilities)
from .components import (ComponentSizes, ExplorationOutcome,
                         all_component_sizes, connected_component, degree,
                         dump_edge_list, empirical_outcome_distribution,
                         exact_outcome_distribution, lazy_explore,
                         load_edge_list, total_variation)
from .configio import (ExperimentConfig, GroundTruthConfig, PolicyConfig,
                       derive_seeds, generate_weights,
                       load_experiment_config, model_params_from_dict)
from .errors import (AssumptionViolation, CapacityError, ConfigError,
                     DomainError, EmptyArmsError, InfluMaxError,
                     InvalidVertexPair, NumericalError, RegimeError,
                     ShapeError, UnknownArmError)
from .experiment import (GroundTruth, PropositionReport, RegretTrace,
                         accumulate_regret, compute_ground_truth,
                         exact_mean_degrees, run_experiment, run_replicates,
                         run_single, summarize_traces, trace_to_csv_bytes,
                         validate_propositions, write_trace_csv)
from .graph_models import (EPS_CRIT, MAX_SAMPLE_VERTICES, ChungLuParams,
                           GraphModel, ModelKind, Regime, SampledGraph,
                           SbmParams, classify_regime, edge_probability,
                           mean_degree, sample_full_graph)

__version__ = "0.1.0"
