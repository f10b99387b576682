"""Input-validation helpers shared by the estimators and the pipeline."""

from __future__ import annotations

from typing import Sequence

from .errors import ValidationError
from .metrics import Trajectory
from .trace import BinnedTrace, NormalizedTrace, Trace


def as_trace_list(X) -> list["Trace | NormalizedTrace | BinnedTrace"]:
    if isinstance(X, (Trace, NormalizedTrace, BinnedTrace)):
        raise ValidationError(
            f"expected a collection of traces, got a bare {type(X).__name__}; "
            f"wrap it in a list")
    items = list(X)
    if not items:
        raise ValidationError("expected at least one trace, got an empty collection")
    for item in items:
        if not isinstance(item, (Trace, NormalizedTrace, BinnedTrace)):
            raise ValidationError(
                f"expected Trace/NormalizedTrace/BinnedTrace items, got "
                f"{type(item).__name__}")
    return items


def as_trajectory_list(X, minimum: int = 1) -> list[Trajectory]:
    if isinstance(X, Trajectory):
        raise ValidationError(
            "expected a collection of trajectories, got a bare Trajectory; "
            "wrap it in a list")
    items = list(X)
    if len(items) < minimum:
        raise ValidationError(
            f"expected at least {minimum} trajectories, got {len(items)}")
    for item in items:
        if not isinstance(item, Trajectory):
            raise ValidationError(
                f"expected Trajectory items, got {type(item).__name__}")
    _check_consistent(items)
    return items


def _check_consistent(trajectories: Sequence[Trajectory]) -> None:
    first = trajectories[0]
    for traj in trajectories[1:]:
        if traj.metrics != first.metrics:
            raise ValidationError(
                f"trajectory {traj.trace_id!r} carries metrics {traj.metrics}, "
                f"expected {first.metrics}")
        if traj.bin_count != first.bin_count:
            raise ValidationError(
                f"trajectory {traj.trace_id!r} has {traj.bin_count} bins, "
                f"expected {first.bin_count}")
