"""Waypoint gates: windowed value corridors a trajectory must pass through.

A gate names a time window on the percent timeline and a closed value
interval for one metric. The default set places three gates (one per
metric) at each of the four Tuckman phases -- forming, storming, norming,
performing -- twelve gates in all. Gate corridors can also be derived
directly from a fitted ground-truth band.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .band import GateBand
from .errors import ValidationError
from .metrics import COHESION, DIVERGENCE, HIERARCHY, MetricId, Trajectory
from .trace import PERCENT_SPAN

Window = tuple[float, float]

# Phase midpoints on the percent timeline and the expected metric levels
# there. These numbers are the published defaults the library ships with.
TUCKMAN_GATE_CENTERS: dict[tuple[str, MetricId], float] = {
    ("Forming", HIERARCHY): 0.48,
    ("Forming", DIVERGENCE): 0.30,
    ("Forming", COHESION): 0.30,
    ("Storming", HIERARCHY): 0.37,
    ("Storming", DIVERGENCE): 0.40,
    ("Storming", COHESION): 0.40,
    ("Norming", HIERARCHY): 0.32,
    ("Norming", DIVERGENCE): 0.30,
    ("Norming", COHESION): 0.50,
    ("Performing", HIERARCHY): 0.35,
    ("Performing", DIVERGENCE): 0.30,
    ("Performing", COHESION): 0.42,
}

TUCKMAN_PHASE_TIMES: dict[str, float] = {
    "Forming": 25.0,
    "Storming": 45.0,
    "Norming": 70.0,
    "Performing": 98.0,
}

WINDOW_STATS = ("mean", "min", "max")


@dataclass(frozen=True)
class Gate:
    name: str
    metric: MetricId
    t_window: Window
    v_min: float
    v_max: float

    def __post_init__(self) -> None:
        lo, hi = float(self.t_window[0]), float(self.t_window[1])
        object.__setattr__(self, "t_window", (lo, hi))
        object.__setattr__(self, "v_min", float(self.v_min))
        object.__setattr__(self, "v_max", float(self.v_max))
        if not (0.0 <= lo <= hi <= PERCENT_SPAN):
            raise ValidationError(
                f"gate {self.name!r}: window [{lo}, {hi}] must sit inside "
                f"[0, {PERCENT_SPAN}]")
        if self.v_min > self.v_max:
            raise ValidationError(f"gate {self.name!r}: v_min exceeds v_max")


@dataclass(frozen=True)
class GateVerdict:
    gate: Gate
    observed: float
    passed: bool


def window_bins(window: Window, bins: int) -> range:
    """Indices of the bins whose interval intersects the closed window."""
    lo, hi = float(window[0]), float(window[1])
    if hi < lo:
        raise ValidationError(f"window [{lo}, {hi}] is inverted")
    width = PERCENT_SPAN / bins
    first = min(bins - 1, max(0, int(np.floor(lo / width))))
    last = min(bins - 1, max(0, int(np.floor(hi / width))))
    return range(first, last + 1)


def gates_from_band(band: GateBand,
                    windows: Sequence[tuple[str, Window]]) -> list[Gate]:
    """Turn band corridors into gates, one per named window.

    The corridor is the loosest envelope over the window: v_min is the
    minimum band lower bound and v_max the maximum upper bound across the
    intersecting bins.
    """
    if not windows:
        raise ValidationError("no gate windows given")
    lower = band.lower()
    upper = band.upper()
    gates = []
    for name, window in windows:
        idx = window_bins(window, band.bin_count)
        if len(idx) == 0:
            raise ValidationError(
                f"gate window {name!r} {window} intersects no bins")
        gates.append(Gate(
            name=name,
            metric=band.metric,
            t_window=window,
            v_min=float(lower[list(idx)].min()),
            v_max=float(upper[list(idx)].max()),
        ))
    return gates


def default_tuckman_windows(window_half_width: float = 5.0) -> list[tuple[str, Window]]:
    if window_half_width <= 0:
        raise ValidationError("window half-width must be positive")
    out = []
    for phase, t in TUCKMAN_PHASE_TIMES.items():
        lo = max(0.0, t - window_half_width)
        hi = min(PERCENT_SPAN, t + window_half_width)
        out.append((phase, (lo, hi)))
    return out


def default_tuckman_gates(value_half_width: float = 0.1,
                          window_half_width: float = 5.0) -> list[Gate]:
    """The stock twelve-gate set: every metric at every Tuckman phase."""
    if value_half_width <= 0:
        raise ValidationError("value half-width must be positive")
    windows = dict(default_tuckman_windows(window_half_width))
    gates = []
    for (phase, metric), center in TUCKMAN_GATE_CENTERS.items():
        gates.append(Gate(
            name=phase,
            metric=metric,
            t_window=windows[phase],
            v_min=center - value_half_width,
            v_max=center + value_half_width,
        ))
    return gates


def evaluate_gates(trajectory: Trajectory, gates: Sequence[Gate],
                   window_stat: str = "mean") -> tuple[list[GateVerdict], bool]:
    """Check every gate and report (verdicts, pruned).

    All gates are always evaluated -- no short-circuit -- so a report can
    show the complete pass/fail picture. ``pruned`` is True when any gate
    failed. The windowed statistic defaults to the mean over intersecting
    bins; observed values on the corridor boundary pass (closed interval).
    """
    if window_stat not in WINDOW_STATS:
        raise ValidationError(
            f"unknown window statistic {window_stat!r}; expected one of {WINDOW_STATS}")
    reduce = {"mean": np.mean, "min": np.min, "max": np.max}[window_stat]
    verdicts = []
    for gate in gates:
        if gate.metric not in trajectory.series:
            raise ValidationError(
                f"trajectory {trajectory.trace_id!r} lacks metric {gate.metric!r} "
                f"required by gate {gate.name!r}")
        series = trajectory.series[gate.metric]
        idx = window_bins(gate.t_window, series.bin_count)
        observed = float(reduce(series.values[list(idx)]))
        passed = gate.v_min <= observed <= gate.v_max
        verdicts.append(GateVerdict(gate, observed, passed))
    pruned = any(not v.passed for v in verdicts)
    return verdicts, pruned


def gate_to_json_dict(gate: Gate) -> dict:
    return {
        "name": gate.name,
        "metric": gate.metric,
        "t_min": gate.t_window[0],
        "t_max": gate.t_window[1],
        "v_min": gate.v_min,
        "v_max": gate.v_max,
    }


def gates_to_json(gates: Sequence[Gate]) -> str:
    return json.dumps([gate_to_json_dict(g) for g in gates], indent=2) + "\n"


def gates_from_json(text: str) -> list[Gate]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad gate file: {exc}") from exc
    if not isinstance(raw, list):
        raise ValidationError("gate file must hold a JSON array")
    gates = []
    for i, obj in enumerate(raw):
        try:
            gates.append(Gate(
                name=str(obj["name"]),
                metric=str(obj["metric"]),
                t_window=(float(obj["t_min"]), float(obj["t_max"])),
                v_min=float(obj["v_min"]),
                v_max=float(obj["v_max"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad gate entry #{i}: {exc}") from exc
    return gates
