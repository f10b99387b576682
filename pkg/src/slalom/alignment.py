"""Dynamic-time-warping trajectory scoring.

Each metric dimension is aligned independently against its target series
with classic DTW over monotonic, continuous warping paths (unit steps
right, down, diagonal). The per-dimension cost is normalized by the length
of the optimal path, and the aggregate validity score is the weighted sum
of the per-dimension normalized costs. Lower is better; identical
trajectories score zero.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .metrics import MetricId, Trajectory

DeltaFn = Callable[[float, float], float]

ORACLE_CELL_CAP = 36
_DECOMPOSITION_TOL = 1e-9


def resolve_delta(delta: "str | DeltaFn | None") -> DeltaFn | None:
    """Map a config name to a local-distance callable (None = fast |a-b|)."""
    if delta is None or delta == "abs":
        return None
    if delta == "squared":
        return lambda a, b: (a - b) ** 2
    if callable(delta):
        return delta
    raise ValidationError(f"unknown local distance {delta!r}")


@dataclass(frozen=True)
class WarpingPath:
    """An alignment path: (0,0) to (n-1,m-1) in unit steps."""

    steps: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        steps = tuple((int(i), int(j)) for i, j in self.steps)
        object.__setattr__(self, "steps", steps)
        if not steps:
            raise ValidationError("a warping path cannot be empty")
        if steps[0] != (0, 0):
            raise ValidationError("warping path must start at (0, 0)")
        for (i0, j0), (i1, j1) in zip(steps, steps[1:]):
            di, dj = i1 - i0, j1 - j0
            if (di, dj) not in ((0, 1), (1, 0), (1, 1)):
                raise ValidationError(
                    f"illegal warping step ({i0},{j0}) -> ({i1},{j1})")

    @property
    def length(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class AlignmentResult:
    """Outcome of aligning one metric dimension."""

    raw_cost: float
    normalized_cost: float
    path: WarpingPath
    metric: MetricId | None = None

    def __post_init__(self) -> None:
        if self.raw_cost < 0:
            raise ValidationError("raw cost cannot be negative")
        expected = self.raw_cost / self.path.length
        if abs(self.normalized_cost - expected) > 1e-12:
            raise ValidationError("normalized cost must equal raw cost / path length")


@dataclass(frozen=True)
class ValidityScore:
    """Weighted aggregate of per-dimension alignment costs."""

    trace_id: str
    per_dimension: tuple[AlignmentResult, ...]
    weights: tuple[float, ...]
    total: float

    def __post_init__(self) -> None:
        dims = tuple(self.per_dimension)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "per_dimension", dims)
        object.__setattr__(self, "weights", weights)
        if len(dims) != len(weights):
            raise ValidationError(
                f"{len(dims)} dimensions but {len(weights)} weights")
        if any(w < 0 for w in weights):
            raise ValidationError("weights must be non-negative")
        check = sum(w * r.normalized_cost for w, r in zip(weights, dims))
        if abs(check - self.total) > _DECOMPOSITION_TOL:
            raise ValidationError(
                f"total {self.total} does not decompose into the weighted "
                f"per-dimension costs (expected {check})")


def _local_cost_matrix(s: np.ndarray, t: np.ndarray,
                       delta: DeltaFn | None) -> np.ndarray:
    if delta is None:
        return np.abs(s[:, None] - t[None, :])
    return np.array([[float(delta(a, b)) for b in t] for a in s], dtype=float)


def dtw(s: Sequence[float], t: Sequence[float],
        delta: "str | DeltaFn | None" = None,
        window: int | None = None) -> AlignmentResult:
    """Align two real sequences and return cost plus the optimal path.

    The cumulative recurrence is D[i,j] = delta(s_i, t_j) + min(D[i-1,j],
    D[i,j-1], D[i-1,j-1]). Backtracking breaks ties deterministically:
    diagonal first, then the step advancing i. ``normalized_cost`` divides
    the raw cost by the number of path cells, so a constant offset of c
    between equal-length flat series scores exactly c.

    ``window`` is an optional Sakoe-Chiba radius; off (unconstrained) by
    default. It is widened to |len(s) - len(t)| when necessary so a path
    always exists.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if s.ndim != 1 or t.ndim != 1 or s.size == 0 or t.size == 0:
        raise ValidationError("dtw needs two non-empty 1-d sequences")
    local = _local_cost_matrix(s, t, resolve_delta(delta))
    n, m = local.shape
    if window is not None:
        if window < 0:
            raise ValidationError("window radius cannot be negative")
        radius = max(int(window), abs(n - m))
        offsets = np.abs(np.arange(n)[:, None] - np.arange(m)[None, :])
        local = np.where(offsets <= radius, local, np.inf)

    cost = local.tolist()
    acc: list[list[float]] = [[0.0] * m for _ in range(n)]
    acc[0][0] = cost[0][0]
    for j in range(1, m):
        acc[0][j] = acc[0][j - 1] + cost[0][j]
    for i in range(1, n):
        row = acc[i]
        above = acc[i - 1]
        crow = cost[i]
        row[0] = above[0] + crow[0]
        for j in range(1, m):
            best = above[j - 1]
            if above[j] < best:
                best = above[j]
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = crow[j] + best

    i, j = n - 1, m - 1
    steps = [(i, j)]
    while i or j:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag = acc[i - 1][j - 1]
            up = acc[i - 1][j]
            left = acc[i][j - 1]
            best = min(diag, up, left)
            if diag == best:
                i -= 1
                j -= 1
            elif up == best:
                i -= 1
            else:
                j -= 1
        steps.append((i, j))
    steps.reverse()

    path = WarpingPath(tuple(steps))
    raw = float(acc[n - 1][m - 1])
    return AlignmentResult(raw_cost=raw, normalized_cost=raw / path.length, path=path)


def dtw_oracle(s: Sequence[float], t: Sequence[float],
               delta: "str | DeltaFn | None" = None) -> float:
    """Minimum alignment cost by brute-force enumeration of every path.

    Exists to cross-check ``dtw``; refuses anything bigger than
    |S| * |T| = 36 cells because the path count explodes.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if s.ndim != 1 or t.ndim != 1 or s.size == 0 or t.size == 0:
        raise ValidationError("dtw_oracle needs two non-empty 1-d sequences")
    if s.size * t.size > ORACLE_CELL_CAP:
        raise ValidationError(
            f"oracle capped at {ORACLE_CELL_CAP} cells, got {s.size * t.size}")
    local = _local_cost_matrix(s, t, resolve_delta(delta)).tolist()
    n, m = len(local), len(local[0])
    best = [float("inf")]

    def walk(i: int, j: int, acc: float) -> None:
        acc = acc + local[i][j]
        if i == n - 1 and j == m - 1:
            if acc < best[0]:
                best[0] = acc
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, acc)
        if i + 1 < n:
            walk(i + 1, j, acc)
        if j + 1 < m:
            walk(i, j + 1, acc)

    walk(0, 0, 0.0)
    return best[0]


def aggregate(results: Sequence[AlignmentResult],
              weights: Sequence[float] | None = None,
              trace_id: str = "") -> ValidityScore:
    """Combine per-dimension alignments into one validity score."""
    results = tuple(results)
    if not results:
        raise ValidationError("nothing to aggregate")
    if weights is None:
        weights = (1.0,) * len(results)
    weights = tuple(float(w) for w in weights)
    if len(weights) != len(results):
        raise ValidationError(
            f"{len(results)} alignment results but {len(weights)} weights")
    total = sum(w * r.normalized_cost for w, r in zip(weights, results))
    return ValidityScore(trace_id=trace_id, per_dimension=results,
                         weights=weights, total=total)


def score_trajectory(sim: Trajectory, target: Trajectory,
                     weights: "Sequence[float] | Mapping[MetricId, float] | None" = None,
                     delta: "str | DeltaFn | None" = None) -> ValidityScore:
    """Score a simulated trajectory against a target, dimension by dimension.

    Both trajectories must carry the same metric set (bin counts may
    differ; DTW is elastic in time). Weights may be a mapping keyed by
    metric or a sequence in the sim's metric order; default is unit weights.
    """
    sim_metrics = set(sim.metrics)
    target_metrics = set(target.metrics)
    if sim_metrics != target_metrics:
        missing = sorted(target_metrics - sim_metrics)
        extra = sorted(sim_metrics - target_metrics)
        parts = []
        if missing:
            parts.append(f"missing from sim: {', '.join(missing)}")
        if extra:
            parts.append(f"missing from target: {', '.join(extra)}")
        raise ValidationError(f"metric sets differ ({'; '.join(parts)})")

    order = sim.metrics
    if weights is None:
        weight_list = [1.0] * len(order)
    elif isinstance(weights, Mapping):
        try:
            weight_list = [float(weights[m]) for m in order]
        except KeyError as exc:
            raise ValidationError(f"no weight for metric {exc.args[0]!r}") from exc
    else:
        weight_list = [float(w) for w in weights]

    results = []
    for metric in order:
        res = dtw(sim.series[metric].values, target.series[metric].values, delta)
        results.append(replace(res, metric=metric))
    return aggregate(results, weight_list, trace_id=sim.trace_id)


def score_to_json_dict(score: ValidityScore) -> dict:
    return {
        "trace_id": score.trace_id,
        "per_dimension": [
            {
                "metric": r.metric,
                "raw": r.raw_cost,
                "normalized": r.normalized_cost,
                "path_length": r.path.length,
            }
            for r in score.per_dimension
        ],
        "weights": list(score.weights),
        "total": score.total,
    }
