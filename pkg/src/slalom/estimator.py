"""Scikit-learn style facade over the validation pipeline.

Two estimators compose into the usual Pipeline pattern:

>>> from sklearn.pipeline import Pipeline
>>> pipe = Pipeline([("extract", TrajectoryExtractor()),
...                  ("validate", SlalomValidator(gates="tuckman"))])
>>> pipe.fit(groundtruth_traces)
>>> pipe.predict(candidate_traces)    # True where every gate passes
array([ True, False])

``TrajectoryExtractor`` maps raw traces to metric trajectories.
``SlalomValidator.fit`` learns per-metric mu/sigma bands (and optionally a
gate set) from ground-truth trajectories; ``predict`` reports gate
survival, ``transform`` yields the per-dimension normalized DTW costs
against the band mean, and ``score_trajectories`` returns the full
aggregate scores.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_trace_list, as_trajectory_list
from .band import build_band
from .embedding import HashedEmbeddingProvider
from .errors import ValidationError
from .gates import (default_tuckman_gates, default_tuckman_windows, evaluate_gates,
                    gates_from_band)
from .metrics import DEFAULT_METRICS, Trajectory, extract_trajectory
from .report import target_from_bands
from .alignment import score_trajectory
from .trace import BinnedTrace, NormalizedTrace, Trace, bin_trace, normalize_timeline


class TrajectoryExtractor(BaseEstimator, TransformerMixin):
    """Transform interaction traces into multivariate metric trajectories.

    Accepts Trace (seconds timeline), NormalizedTrace or BinnedTrace inputs
    and runs whichever pipeline tail is still missing.
    """

    def __init__(self, bins=100, metrics=DEFAULT_METRICS, fill="interpolate",
                 embedding_dim=256, embedding_seed=0, provider=None,
                 categories=None):
        self.bins = bins
        self.metrics = metrics
        self.fill = fill
        self.embedding_dim = embedding_dim
        self.embedding_seed = embedding_seed
        self.provider = provider
        self.categories = categories

    def fit(self, X, y=None):
        as_trace_list(X)
        self.provider_ = self.provider or HashedEmbeddingProvider(
            dim=self.embedding_dim, seed=self.embedding_seed)
        return self

    def transform(self, X) -> list[Trajectory]:
        check_is_fitted(self, "provider_")
        out = []
        for item in as_trace_list(X):
            if isinstance(item, Trace):
                item = normalize_timeline(item)
            if isinstance(item, NormalizedTrace):
                item = bin_trace(item, self.bins)
            out.append(extract_trajectory(
                item, metrics=self.metrics, provider=self.provider_,
                fill=self.fill, categories=self.categories))
        return out


class SlalomValidator(BaseEstimator):
    """Fit ground-truth bands, then gate and score candidate trajectories.

    Parameters
    ----------
    multiplier : band half-width in sigmas (mu +/- multiplier * sigma).
    sigma_floor : lower clamp for the per-bin sample deviation.
    gates : "band" derives corridors from the fitted bands over the stock
        phase windows, "tuckman" uses the published default centers, "none"
        disables pruning, or pass an explicit list of Gate objects.
    window_stat : statistic compared against a gate corridor.
    weights : per-metric weights for the aggregate score (mapping or
        sequence in fitted metric order); unit weights when None.
    delta : local DTW distance, "abs" or "squared".
    """

    def __init__(self, multiplier=2.0, sigma_floor=0.01, gates="band",
                 gate_value_half_width=0.1, gate_window_half_width=5.0,
                 window_stat="mean", weights=None, delta="abs"):
        self.multiplier = multiplier
        self.sigma_floor = sigma_floor
        self.gates = gates
        self.gate_value_half_width = gate_value_half_width
        self.gate_window_half_width = gate_window_half_width
        self.window_stat = window_stat
        self.weights = weights
        self.delta = delta

    def fit(self, X, y=None):
        trajectories = as_trajectory_list(X, minimum=2)
        self.metrics_ = trajectories[0].metrics
        self.bands_ = {
            metric: build_band(trajectories, metric, multiplier=self.multiplier,
                               sigma_floor=self.sigma_floor)
            for metric in self.metrics_
        }
        self.target_ = target_from_bands(self.bands_, self.metrics_)
        self.gates_ = self._resolve_gates()
        return self

    def _resolve_gates(self):
        if self.gates == "band":
            windows = default_tuckman_windows(self.gate_window_half_width)
            out = []
            for metric in self.metrics_:
                out.extend(gates_from_band(self.bands_[metric], windows))
            return out
        if self.gates == "tuckman":
            return default_tuckman_gates(self.gate_value_half_width,
                                         self.gate_window_half_width)
        if self.gates in ("none", None):
            return []
        return list(self.gates)

    def predict(self, X) -> np.ndarray:
        """Boolean per trajectory: True when every gate passes."""
        check_is_fitted(self, "bands_")
        out = []
        for traj in as_trajectory_list(X):
            _, pruned = evaluate_gates(traj, self.gates_, self.window_stat)
            out.append(not pruned)
        return np.asarray(out, dtype=bool)

    def transform(self, X) -> np.ndarray:
        """(n_trajectories, n_metrics) normalized DTW costs vs the band mean."""
        check_is_fitted(self, "bands_")
        scores = self.score_trajectories(X)
        return np.array([
            [r.normalized_cost for r in s.per_dimension] for s in scores
        ])

    def score_trajectories(self, X) -> list:
        """Full aggregate scores (no pruning applied)."""
        check_is_fitted(self, "bands_")
        out = []
        for traj in as_trajectory_list(X):
            missing = [m for m in self.metrics_ if m not in traj.series]
            if missing:
                raise ValidationError(
                    f"trajectory {traj.trace_id!r} lacks metric(s): "
                    f"{', '.join(missing)}")
            view = Trajectory(traj.trace_id,
                              {m: traj.series[m] for m in self.metrics_})
            out.append(score_trajectory(view, self.target_,
                                        self._weight_list(), self.delta))
        return out

    def _weight_list(self):
        if self.weights is None:
            return None
        if isinstance(self.weights, Mapping):
            return {str(k): float(v) for k, v in self.weights.items()}
        return list(self.weights)

    def score(self, X, y=None) -> float:
        """Negated mean total cost, so larger is better (sklearn convention)."""
        totals = [s.total for s in self.score_trajectories(X)]
        return -float(np.mean(totals))
