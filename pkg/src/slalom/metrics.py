"""Per-bin interaction metrics and trajectory extraction.

Three metrics ship with the package, all mapped to [0, 1] per bin:

* ``hierarchy``  -- Gini coefficient of per-speaker word counts. 0 means
  everyone spoke the same amount, (n-1)/n means one speaker said everything.
* ``divergence`` -- mean pairwise cosine distance between utterance
  embeddings, rescaled as (1 - cos) / 2.
* ``cohesion``   -- language style matching over function-word categories.

A bin where a metric has no defined value (nobody spoke, fewer than two
utterances, ...) is marked undefined and filled afterwards by the configured
fill policy; the original definedness mask is preserved.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .categories import DEFAULT_CATEGORIES
from .embedding import EmbeddingProvider, HashedEmbeddingProvider
from .errors import SlalomError, ValidationError
from .text import tokenize
from .trace import BinnedTrace, InteractionEvent

MetricId = str

HIERARCHY: MetricId = "hierarchy"
DIVERGENCE: MetricId = "divergence"
COHESION: MetricId = "cohesion"
DEFAULT_METRICS: tuple[MetricId, ...] = (HIERARCHY, DIVERGENCE, COHESION)

LSM_EPSILON = 1e-4

FILL_POLICIES = ("interpolate", "hold")

# Extra metrics plug in as plain callables: bucket of events -> value or None.
MetricFn = Callable[[Sequence[InteractionEvent]], "float | None"]


@dataclass(frozen=True)
class MetricSeries:
    """One metric sampled over B bins, with its definedness mask."""

    metric: MetricId
    values: np.ndarray
    defined_mask: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.defined_mask, dtype=bool)
        if values.ndim != 1 or mask.shape != values.shape:
            raise ValidationError("values and defined_mask must be 1-d and congruent")
        if values.size == 0:
            raise ValidationError("a metric series needs at least one bin")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "defined_mask", mask)

    @property
    def bin_count(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class Trajectory:
    """All metric series of one trace over a shared bin axis."""

    trace_id: str
    series: dict[MetricId, MetricSeries]

    def __post_init__(self) -> None:
        if not self.series:
            raise ValidationError("a trajectory needs at least one metric series")
        sizes = {s.bin_count for s in self.series.values()}
        if len(sizes) != 1:
            raise ValidationError(f"metric series disagree on bin count: {sorted(sizes)}")
        for key, s in self.series.items():
            if key != s.metric:
                raise ValidationError(f"series key {key!r} does not match metric {s.metric!r}")

    @property
    def metrics(self) -> tuple[MetricId, ...]:
        return tuple(self.series)

    @property
    def bin_count(self) -> int:
        return next(iter(self.series.values())).bin_count


def gini_word_counts(events: Sequence[InteractionEvent],
                     roster: Sequence[str] | None = None) -> float | None:
    """Gini coefficient of per-speaker word counts in one bin.

    G = sum_ij |x_i - x_j| / (2 n^2 mean(x)). Speakers on the roster who
    stayed silent count as zero. Returns None when nobody said a word.
    """
    counts: dict[str, int] = {}
    for e in events:
        counts[e.speaker_id] = counts.get(e.speaker_id, 0) + len(tokenize(e.text))
    speakers = sorted(roster) if roster is not None else sorted(counts)
    x = np.array([counts.get(s, 0) for s in speakers], dtype=float)
    total = x.sum()
    if x.size == 0 or total <= 0:
        return None
    n = x.size
    abs_diffs = np.abs(x[:, None] - x[None, :]).sum()
    return float(abs_diffs / (2.0 * n * n * x.mean()))


def divergence(events: Sequence[InteractionEvent],
               provider: EmbeddingProvider) -> float | None:
    """Mean pairwise cosine distance, (1 - cos) / 2, over bin utterances.

    Utterances whose embedding comes back zero (no tokens) are excluded.
    Returns None if fewer than two embeddable utterances remain.
    """
    texts = [e.text for e in events]
    if len(texts) < 2:
        return None
    vectors = np.asarray(provider.embed(texts), dtype=float)
    if vectors.shape[0] != len(texts):
        raise ValidationError("embedding provider returned a mismatched batch")
    norms = np.linalg.norm(vectors, axis=1)
    keep = norms > 1e-12
    if keep.sum() < 2:
        return None
    unit = vectors[keep] / norms[keep, None]
    cos = np.clip(unit @ unit.T, -1.0, 1.0)
    iu = np.triu_indices(unit.shape[0], k=1)
    return float(np.mean((1.0 - cos[iu]) / 2.0))


def lsm(events: Sequence[InteractionEvent],
        categories: Mapping[str, Sequence[str]] | None = None,
        epsilon: float = LSM_EPSILON) -> float | None:
    """Language style matching across speakers active in the bin.

    For each unordered speaker pair and category c with usage proportions
    p1, p2: LSM_c = 1 - |p1 - p2| / (p1 + p2 + epsilon). The bin value is
    the mean over pairs and categories; categories untouched by both
    speakers score as (nearly) matched. None with fewer than two speakers.
    """
    categories = DEFAULT_CATEGORIES if categories is None else categories
    if not categories:
        raise ValidationError("category table is empty")
    word_sets = {name: frozenset(words) for name, words in categories.items()}

    tokens_by_speaker: dict[str, list[str]] = {}
    for e in events:
        toks = tokenize(e.text)
        if toks:
            tokens_by_speaker.setdefault(e.speaker_id, []).extend(toks)
    speakers = sorted(tokens_by_speaker)
    if len(speakers) < 2:
        return None

    proportions: dict[str, dict[str, float]] = {}
    for s in speakers:
        toks = tokens_by_speaker[s]
        total = len(toks)
        proportions[s] = {
            name: sum(1 for t in toks if t in words) / total
            for name, words in word_sets.items()
        }

    pair_scores = []
    for a, b in itertools.combinations(speakers, 2):
        pa, pb = proportions[a], proportions[b]
        cat_scores = [
            1.0 - abs(pa[c] - pb[c]) / (pa[c] + pb[c] + epsilon)
            for c in word_sets
        ]
        pair_scores.append(sum(cat_scores) / len(cat_scores))
    return float(sum(pair_scores) / len(pair_scores))


def fill_series(values: Sequence[float], mask: Sequence[bool],
                policy: str = "interpolate") -> np.ndarray:
    """Fill undefined bins; defined bins pass through untouched.

    ``interpolate`` draws straight lines between the nearest defined bins
    and extends the first/last defined value to the edges. ``hold`` carries
    the last defined value forward (and the first one backward at the head).
    """
    if policy not in FILL_POLICIES:
        raise ValidationError(f"unknown fill policy {policy!r}; expected one of {FILL_POLICIES}")
    values = np.asarray(values, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValidationError("cannot fill a series with no defined bins")
    if mask.all():
        return values.copy()
    idx = np.arange(values.size)
    if policy == "interpolate":
        return np.interp(idx, idx[mask], values[mask])
    defined = idx[mask]
    # index of the most recent defined bin at or before each position;
    # clipping back-fills the head from the first defined bin
    prev = np.searchsorted(defined, idx, side="right") - 1
    prev = np.clip(prev, 0, defined.size - 1)
    return values[defined[prev]]


def extract_trajectory(binned: BinnedTrace,
                       metrics: Sequence[MetricId] = DEFAULT_METRICS,
                       provider: EmbeddingProvider | None = None,
                       fill: str = "interpolate",
                       categories: Mapping[str, Sequence[str]] | None = None,
                       extra_metrics: Mapping[MetricId, MetricFn] | None = None) -> Trajectory:
    """Turn a binned trace into a multivariate metric trajectory.

    Raises if any requested metric is undefined in every bin (the fill
    policy would have nothing to anchor on).
    """
    if not metrics:
        raise ValidationError("no metrics requested")
    roster = binned.speakers
    series: dict[MetricId, MetricSeries] = {}
    for metric in metrics:
        raw = np.full(binned.bin_count, np.nan)
        mask = np.zeros(binned.bin_count, dtype=bool)
        for i, bucket in enumerate(binned.bins):
            if metric == HIERARCHY:
                value = gini_word_counts(bucket, roster)
            elif metric == DIVERGENCE:
                if provider is None:
                    provider = HashedEmbeddingProvider()
                try:
                    value = divergence(bucket, provider)
                except SlalomError:
                    raise
                except Exception as exc:
                    raise SlalomError(
                        f"embedding provider failed in bin {i} of "
                        f"{binned.trace_id!r}: {exc}") from exc
            elif metric == COHESION:
                value = lsm(bucket, categories)
            elif extra_metrics and metric in extra_metrics:
                value = extra_metrics[metric](bucket)
            else:
                raise ValidationError(f"unknown metric {metric!r}")
            if value is not None:
                raw[i] = value
                mask[i] = True
        if not mask.any():
            raise SlalomError(
                f"metric {metric!r} is undefined in every bin of {binned.trace_id!r}")
        series[metric] = MetricSeries(metric, fill_series(raw, mask, fill), mask)
    return Trajectory(binned.trace_id, series)


def trajectory_to_json_dict(traj: Trajectory) -> dict:
    return {
        "trace_id": traj.trace_id,
        "bins": traj.bin_count,
        "series": [
            {
                "metric": s.metric,
                "values": [float(v) for v in s.values],
                "was_filled": [bool(not d) for d in s.defined_mask],
            }
            for s in traj.series.values()
        ],
    }


def trajectory_from_json_dict(obj: Mapping) -> Trajectory:
    try:
        trace_id = str(obj["trace_id"])
        bins = int(obj["bins"])
        entries = obj["series"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad trajectory document: {exc}") from exc
    series: dict[MetricId, MetricSeries] = {}
    for entry in entries:
        metric = str(entry["metric"])
        values = np.asarray(entry["values"], dtype=float)
        filled = np.asarray(entry["was_filled"], dtype=bool)
        if values.size != bins or filled.size != bins:
            raise ValidationError(
                f"trajectory {trace_id!r}: series {metric!r} length does not match "
                f"bins={bins}")
        series[metric] = MetricSeries(metric, values, ~filled)
    return Trajectory(trace_id, series)


def trajectory_csv_rows(traj: Trajectory):
    """Yield (bin, metric, value, was_filled) rows in export order."""
    for metric, s in traj.series.items():
        for i in range(s.bin_count):
            yield i, metric, float(s.values[i]), bool(not s.defined_mask[i])
