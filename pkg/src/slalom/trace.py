"""Interaction-log model: events, traces, timeline normalization, binning.

The interchange format is JSON-Lines, one utterance per line:

    {"speaker_id": "A", "start_time": 12.4, "end_time": 15.1,
     "text": "so about the remote", "segment": "meeting-b"}

with times in seconds. Traces move through a fixed pipeline: parse (or
concatenate several session traces), rescale the clock to a percent
timeline [0, 100], then bucket events into B equal-width bins by their
midpoint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .errors import ParseError, ValidationError

PERCENT_SPAN = 100.0
_TOL = 1e-9

Segment = tuple[str, tuple[float, float]]


@dataclass(frozen=True)
class InteractionEvent:
    """One timestamped utterance by one speaker. Text may be empty."""

    speaker_id: str
    start_time: float
    end_time: float
    text: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.speaker_id, str) or not self.speaker_id:
            raise ValidationError("speaker_id must be a non-empty string")
        start = float(self.start_time)
        end = float(self.end_time)
        object.__setattr__(self, "start_time", start)
        object.__setattr__(self, "end_time", end)
        if not math.isfinite(start) or not math.isfinite(end):
            raise ValidationError("event times must be finite")
        if start < 0:
            raise ValidationError(f"start_time must be non-negative, got {start}")
        if end < start:
            raise ValidationError(f"end_time {end} precedes start_time {start}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.start_time + self.end_time)


def _sorted_events(events: Iterable[InteractionEvent]) -> tuple[InteractionEvent, ...]:
    # sorted() is stable, so ties on start_time keep their input order.
    return tuple(sorted(events, key=lambda e: e.start_time))


@dataclass(frozen=True)
class Trace:
    """A multi-speaker log on a seconds timeline.

    ``segments`` describes the original sessions as (label, (start, end))
    pairs; it may be empty for single-session logs of unknown provenance.
    Events are kept sorted by start time on construction.
    """

    trace_id: str
    events: tuple[InteractionEvent, ...]
    segments: tuple[Segment, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", _sorted_events(self.events))
        segs = tuple((str(label), (float(lo), float(hi))) for label, (lo, hi) in self.segments)
        for label, (lo, hi) in segs:
            if hi < lo:
                raise ValidationError(f"segment {label!r} has an inverted extent [{lo}, {hi}]")
        object.__setattr__(self, "segments", segs)
        if segs:
            def covered(t: float) -> bool:
                return any(lo - _TOL <= t <= hi + _TOL for _, (lo, hi) in segs)

            for e in self.events:
                if not (covered(e.start_time) and covered(e.end_time)):
                    raise ValidationError(
                        f"event at [{e.start_time}, {e.end_time}] falls outside "
                        f"the union of segment extents")

    @property
    def span(self) -> tuple[float, float]:
        if not self.events:
            raise ValidationError(f"trace {self.trace_id!r} has no events")
        return (min(e.start_time for e in self.events),
                max(e.end_time for e in self.events))

    @property
    def speakers(self) -> tuple[str, ...]:
        return tuple(sorted({e.speaker_id for e in self.events}))

    def segment_label_for(self, event: InteractionEvent) -> str | None:
        """Label of the segment holding the event's midpoint, if any."""
        if not self.segments:
            return None
        mid = event.midpoint
        for label, (lo, hi) in self.segments:
            if lo - _TOL <= mid < hi:
                return label
        last_label, (_, last_hi) = self.segments[-1]
        if mid <= last_hi + _TOL:
            return last_label
        return None


@dataclass(frozen=True)
class NormalizedTrace:
    """A trace rescaled to the percent timeline [0, 100]."""

    trace_id: str
    events: tuple[InteractionEvent, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", _sorted_events(self.events))
        if not self.events:
            raise ValidationError("a normalized trace needs at least one event")
        lo = min(e.start_time for e in self.events)
        hi = max(e.end_time for e in self.events)
        if abs(lo) > _TOL or abs(hi - PERCENT_SPAN) > _TOL:
            raise ValidationError(
                f"normalized timeline must span [0, {PERCENT_SPAN}], got [{lo}, {hi}]")

    @property
    def speakers(self) -> tuple[str, ...]:
        return tuple(sorted({e.speaker_id for e in self.events}))


@dataclass(frozen=True)
class BinnedTrace:
    """Events bucketed into equal-width percent-timeline bins."""

    trace_id: str
    bins: tuple[tuple[InteractionEvent, ...], ...]

    @property
    def bin_count(self) -> int:
        return len(self.bins)

    @property
    def speakers(self) -> tuple[str, ...]:
        """The trace roster: every speaker observed in any bin, sorted."""
        seen: set[str] = set()
        for bucket in self.bins:
            seen.update(e.speaker_id for e in bucket)
        return tuple(sorted(seen))

    def to_json_dict(self) -> dict:
        """Debug view: bin index -> event list."""
        return {
            "trace_id": self.trace_id,
            "bin_count": self.bin_count,
            "bins": {
                str(i): [
                    {"speaker_id": e.speaker_id, "start_time": e.start_time,
                     "end_time": e.end_time, "text": e.text}
                    for e in bucket
                ]
                for i, bucket in enumerate(self.bins)
            },
        }


def build_segments(events: Sequence[InteractionEvent],
                   labels: Sequence[str]) -> tuple[Segment, ...]:
    """Reconstruct session segments from per-event labels.

    Extent of each segment is [min start, max end] over its events; segments
    are ordered by extent start, then first appearance.
    """
    if len(events) != len(labels):
        raise ValidationError("events and labels must pair up one-to-one")
    info: dict[str, list[float]] = {}
    first_seen: dict[str, int] = {}
    for idx, (event, label) in enumerate(zip(events, labels)):
        label = str(label)
        if label not in info:
            info[label] = [event.start_time, event.end_time]
            first_seen[label] = idx
        else:
            rec = info[label]
            rec[0] = min(rec[0], event.start_time)
            rec[1] = max(rec[1], event.end_time)
    ordered = sorted(info, key=lambda lab: (info[lab][0], first_seen[lab]))
    return tuple((lab, (info[lab][0], info[lab][1])) for lab in ordered)


def _read_source(source: bytes | str | IO) -> str:
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            return source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8: {exc}") from exc
    if isinstance(source, str):
        return source
    raise ValidationError(f"unsupported source type {type(source).__name__}")


def parse_trace(source: bytes | str | IO, trace_id: str = "trace") -> Trace:
    """Parse JSON-Lines interchange input into a Trace.

    Blank lines are skipped. A malformed line raises ParseError carrying the
    1-based line number; an event whose end precedes its start raises
    ValidationError naming the line.
    """
    text = _read_source(source)
    events: list[InteractionEvent] = []
    labels: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: invalid JSON ({exc.msg})", line=lineno) from exc
        if not isinstance(obj, dict):
            raise ParseError(f"line {lineno}: expected a JSON object", line=lineno)
        missing = [k for k in ("speaker_id", "start_time", "end_time", "text", "segment")
                   if k not in obj]
        if missing:
            raise ParseError(f"line {lineno}: missing key(s) {', '.join(missing)}",
                             line=lineno)
        try:
            speaker = str(obj["speaker_id"])
            start = float(obj["start_time"])
            end = float(obj["end_time"])
            utterance = str(obj["text"])
            segment = str(obj["segment"])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"line {lineno}: bad field value ({exc})", line=lineno) from exc
        try:
            event = InteractionEvent(speaker, start, end, utterance)
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
        events.append(event)
        labels.append(segment)
    return Trace(trace_id, tuple(events), build_segments(events, labels))


def trace_to_jsonl(trace: Trace) -> str:
    """Serialize a trace back to the JSON-Lines interchange format."""
    lines = []
    for e in trace.events:
        lines.append(json.dumps({
            "speaker_id": e.speaker_id,
            "start_time": e.start_time,
            "end_time": e.end_time,
            "text": e.text,
            "segment": trace.segment_label_for(e) or "0",
        }, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def _resolve_trim_indices(policy, n_sessions: int) -> set[int]:
    if policy == "after-first":
        return set(range(1, n_sessions))
    if policy == "all":
        return set(range(n_sessions))
    if policy in ("none", None):
        return set()
    try:
        indices = {int(i) for i in policy}
    except (TypeError, ValueError):
        raise ValidationError(f"unknown trim policy {policy!r}") from None
    bad = [i for i in indices if not 0 <= i < n_sessions]
    if bad:
        raise ValidationError(f"trim indices {sorted(bad)} out of range for "
                              f"{n_sessions} sessions")
    return indices


def concatenate_sessions(sessions: Sequence[Trace],
                         trim_fraction: float = 0.05,
                         trim_policy="after-first",
                         trace_id: str | None = None) -> Trace:
    """Lay session traces end to end on one seconds timeline.

    Trimmed sessions (by default every session after the first) drop whole
    events whose midpoint falls in the first or last ``trim_fraction`` of
    that session's local duration. Trimming removes events, never time: the
    concatenated timeline is the sum of the full session durations, and each
    session becomes a segment labelled with its trace_id.
    """
    if not sessions:
        raise ValidationError("session list is empty")
    if not 0.0 <= trim_fraction < 0.5:
        raise ValidationError(f"trim_fraction must lie in [0, 0.5), got {trim_fraction}")
    trim_at = _resolve_trim_indices(trim_policy, len(sessions))

    out_events: list[InteractionEvent] = []
    segments: list[Segment] = []
    used_labels: set[str] = set()
    offset = 0.0
    for idx, sess in enumerate(sessions):
        if not sess.events:
            raise ValidationError(f"session {sess.trace_id!r} has no events")
        lo, hi = sess.span
        duration = hi - lo
        if duration <= 0:
            raise ValidationError(f"session {sess.trace_id!r} has zero duration")
        kept = sess.events
        if idx in trim_at and trim_fraction > 0:
            cut = trim_fraction * duration
            kept = tuple(e for e in sess.events
                         if not (e.midpoint < lo + cut or e.midpoint > hi - cut))
        for e in kept:
            out_events.append(InteractionEvent(
                e.speaker_id, e.start_time - lo + offset, e.end_time - lo + offset, e.text))
        label = sess.trace_id
        k = 2
        while label in used_labels:
            label = f"{sess.trace_id}#{k}"
            k += 1
        used_labels.add(label)
        segments.append((label, (offset, offset + duration)))
        offset += duration
    name = trace_id if trace_id is not None else "+".join(s.trace_id for s in sessions)
    return Trace(name, tuple(out_events), tuple(segments))


def normalize_timeline(trace: Trace | NormalizedTrace) -> NormalizedTrace:
    """Affinely rescale the trace clock so it spans exactly [0, 100]."""
    if not trace.events:
        raise ValidationError("cannot normalize a trace with no events")
    lo = min(e.start_time for e in trace.events)
    hi = max(e.end_time for e in trace.events)
    span = hi - lo
    if span <= 0:
        raise ValidationError("cannot rescale a zero-span timeline")
    scale = PERCENT_SPAN / span
    events = tuple(
        InteractionEvent(e.speaker_id, (e.start_time - lo) * scale,
                         (e.end_time - lo) * scale, e.text)
        for e in trace.events)
    return NormalizedTrace(trace.trace_id, events)


def bin_trace(trace: NormalizedTrace, bins: int = 100) -> BinnedTrace:
    """Bucket events into ``bins`` equal-width bins by midpoint.

    Bin i covers [i*w, (i+1)*w) with w = 100/bins; the right edge t = 100
    is closed, i.e. it stays in the last bin.
    """
    if bins < 1:
        raise ValidationError(f"bin count must be >= 1, got {bins}")
    width = PERCENT_SPAN / bins
    buckets: list[list[InteractionEvent]] = [[] for _ in range(bins)]
    for e in trace.events:
        idx = int(math.floor(e.midpoint / width))
        idx = min(max(idx, 0), bins - 1)
        buckets[idx].append(e)
    return BinnedTrace(trace.trace_id, tuple(tuple(b) for b in buckets))
