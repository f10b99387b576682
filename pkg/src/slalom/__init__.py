"""SLALOM: waypoint gates and DTW scoring for simulated group interactions.

The pipeline turns multi-speaker interaction logs into multivariate metric
trajectories (hierarchy, divergence, cohesion per timeline bin), fits
ground-truth mean/deviation bands from a reference corpus, checks
candidate runs against windowed waypoint gates, and scores the survivors
with per-dimension dynamic time warping aggregated into a single validity
total.
"""

__version__ = "0.1.0"

from .alignment import (AlignmentResult, ValidityScore, WarpingPath, aggregate,
                        dtw, dtw_oracle, score_trajectory)
from .band import GateBand, band_contains, build_band
from .categories import DEFAULT_CATEGORIES, dump_categories, load_categories
from .config import PipelineConfig, load_config
from .embedding import EmbeddingProvider, HashedEmbeddingProvider
from .errors import ConfigError, ParseError, SlalomError, ValidationError
from .estimator import SlalomValidator, TrajectoryExtractor
from .gates import (Gate, GateVerdict, TUCKMAN_GATE_CENTERS, default_tuckman_gates,
                    default_tuckman_windows, evaluate_gates, gates_from_band)
from .metrics import (COHESION, DEFAULT_METRICS, DIVERGENCE, HIERARCHY, MetricSeries,
                      Trajectory, divergence, extract_trajectory, fill_series,
                      gini_word_counts, lsm)
from .report import ValidityReport, build_report, target_from_bands
from .synth import (ARCHETYPE_ANCHORS, SynthArchetype, archetype_a, archetype_b,
                    archetype_c, demo_corpus, generate, reference_trajectories)
from .trace import (BinnedTrace, InteractionEvent, NormalizedTrace, Trace, bin_trace,
                    concatenate_sessions, normalize_timeline, parse_trace)

__all__ = [
    "AlignmentResult", "ValidityScore", "WarpingPath", "aggregate", "dtw",
    "dtw_oracle", "score_trajectory",
    "GateBand", "band_contains", "build_band",
    "DEFAULT_CATEGORIES", "dump_categories", "load_categories",
    "PipelineConfig", "load_config",
    "EmbeddingProvider", "HashedEmbeddingProvider",
    "ConfigError", "ParseError", "SlalomError", "ValidationError",
    "SlalomValidator", "TrajectoryExtractor",
    "Gate", "GateVerdict", "TUCKMAN_GATE_CENTERS", "default_tuckman_gates",
    "default_tuckman_windows", "evaluate_gates", "gates_from_band",
    "COHESION", "DEFAULT_METRICS", "DIVERGENCE", "HIERARCHY", "MetricSeries",
    "Trajectory", "divergence", "extract_trajectory", "fill_series",
    "gini_word_counts", "lsm",
    "ValidityReport", "build_report", "target_from_bands",
    "ARCHETYPE_ANCHORS", "SynthArchetype", "archetype_a", "archetype_b",
    "archetype_c", "demo_corpus", "generate", "reference_trajectories",
    "BinnedTrace", "InteractionEvent", "NormalizedTrace", "Trace", "bin_trace",
    "concatenate_sessions", "normalize_timeline", "parse_trace",
    "__version__",
]
