"""surveysim: deterministic target-conditioned survey simulation on
gridded patch-embedding worlds.

One-shot exemplar detection scores every grid cell for a target class and
its learned environmental context; a greedy myopic policy follows those
scores while an exhaustive lawnmower provides the coverage baseline. All
randomness flows through seeded generators, so runs are reproducible bit
for bit.
"""

from .analysis import RegressionResult, cooccurrence_regression, cooccurrence_scores, least_squares_line
from .context import (ContextBuffer, DEFAULT_CAPACITY, DEFAULT_SAMPLE_SIZE, DEFAULT_TRIGGER,
                      as_exemplar_set, init_buffer, update_if_triggered)
from .detector import (ExemplarSet, PatchAssignment, assign_patches, cosine_similarity,
                       image_score, max_similarities)
from .errors import (ConfigurationError, DegenerateInputError, FormatErrorCode,
                     GenerationError, SiteFormatError, SiteValidationError, SurveysimError)
from .experiment import (NOT_REACHED, AggregateCurve, BatchResult, RunConfig,
                         aggregate_trials, derive_trial_seed, normalized_times,
                         reward_curve, run_batch, time_to_fraction)
from .planner import (ContextMode, PolicyConfig, PolicyState, SharedFeatures, Signal,
                      SignalMode, TrialResult, TrialScorer, greedy_step, lawnmower_path,
                      run_policy, scalar_normalization, score_cell, trial_streams)
from .siteio import (SiteMeta, load_exemplars, load_site, load_site_with_meta,
                     read_embeddings, save_exemplars, save_results, save_site,
                     write_embeddings)
from .synthworld import (SynthParams, WorldProvenance, exemplars_from_provenance,
                         generate_world, query_patches)
from .world import CellIndex, CellObservation, SiteGrid, neighbors8, validate

__version__ = "0.1.0"

__all__ = [
    "AggregateCurve", "BatchResult", "CellIndex", "CellObservation", "ConfigurationError",
    "ContextBuffer", "ContextMode", "DEFAULT_CAPACITY", "DEFAULT_SAMPLE_SIZE",
    "DEFAULT_TRIGGER", "DegenerateInputError", "ExemplarSet", "FormatErrorCode",
    "GenerationError", "NOT_REACHED", "PatchAssignment", "PolicyConfig", "PolicyState",
    "RegressionResult", "RunConfig", "SharedFeatures", "Signal", "SignalMode",
    "SiteFormatError", "SiteGrid", "SiteMeta", "SiteValidationError", "SurveysimError",
    "SynthParams", "TrialResult", "TrialScorer", "WorldProvenance", "aggregate_trials",
    "as_exemplar_set", "assign_patches", "cooccurrence_regression", "cooccurrence_scores",
    "cosine_similarity", "derive_trial_seed", "exemplars_from_provenance", "generate_world",
    "greedy_step", "image_score", "init_buffer", "lawnmower_path", "least_squares_line",
    "load_exemplars", "load_site", "load_site_with_meta", "max_similarities",
    "neighbors8", "normalized_times", "query_patches", "read_embeddings", "reward_curve",
    "run_batch", "run_policy", "save_exemplars", "save_results", "save_site",
    "scalar_normalization", "score_cell", "time_to_fraction", "trial_streams",
    "update_if_triggered", "validate", "write_embeddings",
]
