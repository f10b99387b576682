"""Ground-truth confidence bands over binned metric trajectories.

A band is the per-bin mean and sample standard deviation of one metric
across a corpus of reference trajectories, widened to mu +/- multiplier *
sigma. With the default multiplier of 2 and roughly normal per-bin spread
the band covers about 95.4% of reference mass per bin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .metrics import MetricId, Trajectory

DEFAULT_MULTIPLIER = 2.0
DEFAULT_SIGMA_FLOOR = 0.01


@dataclass(frozen=True)
class GateBand:
    """Per-bin (mu, sigma) envelope for one metric."""

    metric: MetricId
    mu: np.ndarray
    sigma: np.ndarray
    n_traces: int
    band_width_multiplier: float = DEFAULT_MULTIPLIER

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        if mu.ndim != 1 or sigma.shape != mu.shape:
            raise ValidationError("mu and sigma must be 1-d arrays of equal length")
        if (sigma <= 0).any():
            raise ValidationError("sigma must be strictly positive everywhere")
        if self.n_traces < 2:
            raise ValidationError("a band summarizes at least two trajectories")
        if self.band_width_multiplier <= 0:
            raise ValidationError("band width multiplier must be positive")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def bin_count(self) -> int:
        return int(self.mu.size)

    def lower(self) -> np.ndarray:
        return self.mu - self.band_width_multiplier * self.sigma

    def upper(self) -> np.ndarray:
        return self.mu + self.band_width_multiplier * self.sigma


def build_band(trajectories: Sequence[Trajectory], metric: MetricId,
               multiplier: float = DEFAULT_MULTIPLIER,
               sigma_floor: float = DEFAULT_SIGMA_FLOOR) -> GateBand:
    """Fit a band for one metric from two or more reference trajectories.

    Sigma is the per-bin sample standard deviation (n-1 denominator),
    floored at ``sigma_floor`` so a degenerate corpus still yields a usable
    band. Series are used as stored, i.e. after fill.
    """
    if len(trajectories) < 2:
        raise ValidationError(
            f"need at least 2 trajectories to build a band, got {len(trajectories)}")
    if sigma_floor <= 0:
        raise ValidationError("sigma_floor must be positive")
    rows = []
    for traj in trajectories:
        if metric not in traj.series:
            raise ValidationError(f"trajectory {traj.trace_id!r} lacks metric {metric!r}")
        rows.append(traj.series[metric].values)
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValidationError(f"trajectories disagree on bin count: {sorted(widths)}")
    matrix = np.vstack(rows)
    mu = matrix.mean(axis=0)
    sigma = np.maximum(matrix.std(axis=0, ddof=1), sigma_floor)
    return GateBand(metric, mu, sigma, len(trajectories), float(multiplier))


def band_contains(band: GateBand, bin_index: int, value: float) -> bool:
    """Closed-interval membership test for one bin.

    Compares against the same lower()/upper() bounds the band exports, so a
    value sitting exactly on a serialized bound always counts as inside.
    """
    if not 0 <= bin_index < band.bin_count:
        raise ValidationError(
            f"bin {bin_index} out of range for a {band.bin_count}-bin band")
    half = band.band_width_multiplier * band.sigma[bin_index]
    mu = band.mu[bin_index]
    return bool(mu - half <= value <= mu + half)


def band_to_json_dict(band: GateBand, provenance: Mapping[str, str] | None = None) -> dict:
    return {
        "metric": band.metric,
        "bins": band.bin_count,
        "multiplier": band.band_width_multiplier,
        "mu": [float(v) for v in band.mu],
        "sigma": [float(v) for v in band.sigma],
        "n_traces": band.n_traces,
        "provenance": dict(provenance or {}),
    }


def band_from_json_dict(obj: Mapping) -> GateBand:
    try:
        return GateBand(
            metric=str(obj["metric"]),
            mu=np.asarray(obj["mu"], dtype=float),
            sigma=np.asarray(obj["sigma"], dtype=float),
            n_traces=int(obj["n_traces"]),
            band_width_multiplier=float(obj["multiplier"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad band document: {exc}") from exc
