"""Synthetic trajectories and a self-contained demo corpus.

Three named archetypes cover the interesting regimes:

* A follows the stock gate centers (a healthy group arc),
* B stagnates: flat lines that miss the storming bump entirely,
* C runs away: hierarchy ramps to 0.7 while cohesion crashes to 0.1.

``generate`` samples an archetype directly in metric space (piecewise
linear anchors at bin centers plus seeded Gaussian noise, clipped to
[0, 1]). ``demo_corpus`` goes one level deeper and fabricates event-level
logs whose word counts and function-word mixes approximately realize the
archetype-A targets, so the whole parse -> metrics -> band -> gates -> DTW
pipeline can run without any licensed corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .metrics import COHESION, DIVERGENCE, HIERARCHY, MetricId, MetricSeries, Trajectory
from .trace import PERCENT_SPAN, InteractionEvent, Trace, build_segments

Anchors = tuple[tuple[float, float], ...]

ARCHETYPE_ANCHORS: dict[str, dict[MetricId, Anchors]] = {
    "A": {
        HIERARCHY: ((0.0, 0.50), (25.0, 0.48), (45.0, 0.37), (70.0, 0.32), (100.0, 0.35)),
        DIVERGENCE: ((0.0, 0.30), (25.0, 0.30), (45.0, 0.40), (70.0, 0.30), (100.0, 0.30)),
        COHESION: ((0.0, 0.25), (25.0, 0.30), (45.0, 0.40), (70.0, 0.50), (100.0, 0.42)),
    },
    "B": {
        HIERARCHY: ((0.0, 0.42), (100.0, 0.42)),
        DIVERGENCE: ((0.0, 0.30), (100.0, 0.30)),
        COHESION: ((0.0, 0.35), (100.0, 0.35)),
    },
    "C": {
        HIERARCHY: ((0.0, 0.48), (30.0, 0.55), (100.0, 0.70)),
        DIVERGENCE: ((0.0, 0.30), (40.0, 0.50), (100.0, 0.70)),
        COHESION: ((0.0, 0.35), (30.0, 0.30), (100.0, 0.10)),
    },
}


@dataclass(frozen=True)
class SynthArchetype:
    """A named bundle of per-metric anchors plus noise and seed."""

    name: str
    anchors: Mapping[MetricId, Anchors]
    noise_sigma: float = 0.02
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.anchors:
            raise ValidationError("an archetype needs at least one metric")
        if self.noise_sigma < 0:
            raise ValidationError("noise_sigma cannot be negative")


def archetype_a(seed: int = 0, noise_sigma: float = 0.02) -> SynthArchetype:
    return SynthArchetype("A", ARCHETYPE_ANCHORS["A"], noise_sigma, seed)


def archetype_b(seed: int = 0, noise_sigma: float = 0.02) -> SynthArchetype:
    return SynthArchetype("B", ARCHETYPE_ANCHORS["B"], noise_sigma, seed)


def archetype_c(seed: int = 0, noise_sigma: float = 0.02) -> SynthArchetype:
    return SynthArchetype("C", ARCHETYPE_ANCHORS["C"], noise_sigma, seed)


ARCHETYPES = {"A": archetype_a, "B": archetype_b, "C": archetype_c}


def generate(archetype: SynthArchetype, bins: int = 100,
             trace_id: str | None = None) -> Trajectory:
    """Sample an archetype into a trajectory at the bin centers.

    Anchors must cover the whole [0, 100] timeline with strictly
    increasing times. The same archetype (same seed) always yields the
    same trajectory.
    """
    if bins < 2:
        raise ValidationError("generation needs at least 2 bins")
    rng = np.random.default_rng(archetype.seed)
    centers = (np.arange(bins) + 0.5) * (PERCENT_SPAN / bins)
    series: dict[MetricId, MetricSeries] = {}
    for metric, anchors in archetype.anchors.items():
        ts = np.array([t for t, _ in anchors], dtype=float)
        vs = np.array([v for _, v in anchors], dtype=float)
        if ts.size < 2 or (np.diff(ts) <= 0).any():
            raise ValidationError(
                f"metric {metric!r}: anchor times must be strictly increasing")
        if ts[0] > 1e-9 or ts[-1] < PERCENT_SPAN - 1e-9:
            raise ValidationError(
                f"metric {metric!r}: anchors must cover [0, {PERCENT_SPAN}]")
        values = np.interp(centers, ts, vs)
        if archetype.noise_sigma > 0:
            values = values + rng.normal(0.0, archetype.noise_sigma, bins)
        series[metric] = MetricSeries(metric, np.clip(values, 0.0, 1.0),
                                      np.ones(bins, dtype=bool))
    name = trace_id if trace_id is not None else f"sim-{archetype.name}-seed{archetype.seed}"
    return Trajectory(name, series)


def reference_trajectories(n_traces: int = 15, bins: int = 100,
                           noise_sigma: float = 0.02,
                           seed: int = 1000) -> list[Trajectory]:
    """A small archetype-A ensemble, handy as a stand-in ground truth."""
    if n_traces < 2:
        raise ValidationError("a reference ensemble needs at least 2 trajectories")
    return [
        generate(archetype_a(seed=seed + k, noise_sigma=noise_sigma), bins=bins,
                 trace_id=f"ref{k:02d}")
        for k in range(n_traces)
    ]


# ---------------------------------------------------------------------------
# Event-level demo corpus
# ---------------------------------------------------------------------------

_SPEAKERS = ("spk1", "spk2", "spk3", "spk4")
_SEGMENT_LABELS = ("A", "B", "C", "D")
_TIMELINE_SECONDS = 2400.0
_FUNCTION_FRACTION = 0.45

# One representative word per category, used by every speaker.
_SHARED_FUNCTION_WORDS = ("we", "it", "the", "in", "and", "is", "not", "all", "very")
# Two single-category words each speaker leans on; the pairwise disjointness
# of these sets is what pulls style matching below 1.
_PRIVATE_FUNCTION_WORDS = (("i", "this"), ("a", "on"), ("but", "was"), ("no", "some"))
_TOPIC_VOCAB = 8


def _largest_remainder(shares: Sequence[float], total: int) -> list[int]:
    raw = [s * total for s in shares]
    base = [int(math.floor(r)) for r in raw]
    leftover = total - sum(base)
    order = sorted(range(len(shares)), key=lambda k: (-(raw[k] - base[k]), k))
    for k in order[:leftover]:
        base[k] += 1
    return base


def _gini_shares(target: float) -> list[float]:
    # For 4 speakers, mixing the equal split with a single-speaker spike at
    # ratio alpha gives a Gini of exactly 0.75 * alpha.
    alpha = min(max(target / 0.75, 0.0), 1.0)
    rest = (1.0 - alpha) / 4.0
    return [rest + alpha, rest, rest, rest]


def _mismatch_from_lsm(target: float) -> float:
    # Invert the pair score of the shared-plus-private mix: with mismatch m,
    # LSM = (5 + 4 * (1 - (m/2) / (2(1-m)/9 + m/2))) / 9, reachable down to 5/9.
    target = min(max(target, 5.0 / 9.0 + 1e-6), 1.0)
    y = 9.0 * (1.0 - target) / 4.0
    return min(max(4.0 * y / (9.0 - 5.0 * y), 0.0), 1.0)


def _spread(count: int, n_slots: int) -> list[int]:
    base, rem = divmod(count, n_slots)
    return [base + (1 if k < rem else 0) for k in range(n_slots)]


def _utterance_tokens(count: int, mismatch: float, topic_frac: float,
                      speaker_idx: int, topic_words: Sequence[str],
                      unique_prefix: str) -> list[str]:
    func = min(count, max(1, round(_FUNCTION_FRACTION * count)))
    private = round(mismatch * func)
    shared = func - private
    rest = count - func
    topical = min(rest, round(topic_frac * rest))
    unique = rest - topical

    tokens: list[str] = []
    for word, reps in zip(_SHARED_FUNCTION_WORDS,
                          _spread(shared, len(_SHARED_FUNCTION_WORDS))):
        tokens.extend([word] * reps)
    priv_words = _PRIVATE_FUNCTION_WORDS[speaker_idx]
    tokens.extend([priv_words[0]] * ((private + 1) // 2))
    tokens.extend([priv_words[1]] * (private // 2))
    for word, reps in zip(topic_words, _spread(topical, len(topic_words))):
        tokens.extend([word] * reps)
    tokens.extend(f"{unique_prefix}{k}" for k in range(unique))
    return tokens


def demo_corpus(n_groups: int = 15, seed: int = 0, bins: int = 100) -> list[Trace]:
    """Fabricate event-level group logs tracking the archetype-A targets.

    Each group is a 40-minute, four-segment, four-speaker trace with one
    utterance per speaker per future bin. Word counts follow the hierarchy
    target exactly up to integer rounding; function-word mixes and topic
    overlap steer cohesion and divergence into the right neighbourhood
    (both are approximate by construction). Per-group seeds are derived as
    ``seed XOR group_index``, so the corpus is reproducible byte for byte.
    """
    if n_groups < 1:
        raise ValidationError("n_groups must be >= 1")
    if bins < 4:
        raise ValidationError("the demo corpus needs at least 4 bins")
    anchors = ARCHETYPE_ANCHORS["A"]
    centers = (np.arange(bins) + 0.5) * (PERCENT_SPAN / bins)
    bin_len = _TIMELINE_SECONDS / bins
    slot = bin_len / 4.0

    traces = []
    for g in range(n_groups):
        rng = np.random.default_rng(seed ^ g)
        curves = {}
        for metric in (HIERARCHY, DIVERGENCE, COHESION):
            ts = np.array([t for t, _ in anchors[metric]])
            vs = np.array([v for _, v in anchors[metric]])
            vs = vs + rng.normal(0.0, 0.02, vs.size)
            curves[metric] = np.interp(centers, ts, vs)
        words_per_bin = rng.integers(70, 91, size=bins)

        g_target = np.clip(curves[HIERARCHY], 0.02, 0.70)
        d_target = np.clip(curves[DIVERGENCE], 0.05, 0.45)
        l_target = np.clip(curves[COHESION] + 0.35, 5.0 / 9.0 + 0.005, 0.995)

        events: list[InteractionEvent] = []
        labels: list[str] = []
        for i in range(bins):
            counts = _largest_remainder(_gini_shares(float(g_target[i])),
                                        int(words_per_bin[i]))
            mismatch = _mismatch_from_lsm(float(l_target[i]))
            topic_frac = float(np.clip(1.0 - 2.0 * d_target[i], 0.05, 0.95))
            topic_words = [f"plan{i:03d}w{k}" for k in range(_TOPIC_VOCAB)]
            segment = _SEGMENT_LABELS[min(3, (4 * i) // bins)]
            for s in range(4):
                tokens = _utterance_tokens(
                    max(1, counts[s]), mismatch, topic_frac, s, topic_words,
                    unique_prefix=f"note{g:02d}b{i:03d}s{s}w")
                jitter = float(rng.uniform(0.0, 1.5))
                start = i * bin_len + s * slot + jitter
                end = start + 4.0
                if i == 0 and s == 0:
                    start, end = 0.0, 4.0
                if i == bins - 1 and s == 3:
                    start, end = _TIMELINE_SECONDS - 4.0, _TIMELINE_SECONDS
                events.append(InteractionEvent(_SPEAKERS[s], start, end,
                                               " ".join(tokens)))
                labels.append(segment)
        traces.append(Trace(f"group{g:02d}", tuple(events),
                            build_segments(events, labels)))
    return traces
