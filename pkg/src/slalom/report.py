"""Validity reports: gate verdicts, scores, table and plot bundles.

A report bundles everything one scoring run produced: the resolved config
hash, the bands, the gate set, per-trace verdicts and (for unpruned
traces) per-dimension DTW costs, a Sim/Hierarchy/Divergence/Cohesion/Total
summary table, and per-metric plot series. Numbers destined for the CSV
table are rounded once (3 decimals, round-half-even) and the same rounded
values are embedded in the JSON, so the two never disagree.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .alignment import DeltaFn, ValidityScore, score_to_json_dict, score_trajectory
from .band import GateBand, band_to_json_dict
from .errors import ValidationError
from .gates import Gate, GateVerdict, evaluate_gates, gate_to_json_dict
from .metrics import MetricId, MetricSeries, Trajectory

METRIC_TITLES = {"hierarchy": "Hierarchy", "divergence": "Divergence",
                 "cohesion": "Cohesion"}


def metric_title(metric: MetricId) -> str:
    return METRIC_TITLES.get(metric, metric.replace("_", " ").title())


def round3(x: float) -> float:
    """Display rounding: 3 decimals, round-half-even (Python's default)."""
    return round(float(x), 3)


def fmt3(x: float) -> str:
    return f"{round3(x):.3f}"


@dataclass(frozen=True)
class TraceResult:
    trace_id: str
    verdicts: tuple[GateVerdict, ...]
    pruned: bool
    score: ValidityScore | None
    trajectory: Trajectory

    def failed_gate_names(self) -> list[str]:
        return [f"{v.gate.name}:{v.gate.metric}" for v in self.verdicts if not v.passed]


@dataclass(frozen=True)
class ValidityReport:
    config_hash: str
    bins: int
    metrics: tuple[MetricId, ...]
    weights: tuple[float, ...]
    bands: dict[MetricId, GateBand]
    gates: tuple[Gate, ...]
    results: tuple[TraceResult, ...]

    def table_rows(self) -> list[list]:
        """Summary rows; a pruned trace shows which gates it missed."""
        header = ["Sim"] + [metric_title(m) for m in self.metrics] + ["Total"]
        rows: list[list] = [header]
        for res in self.results:
            if res.pruned or res.score is None:
                rows.append([res.trace_id,
                             f"PRUNED({', '.join(res.failed_gate_names())})"])
                continue
            by_metric = {r.metric: r.normalized_cost for r in res.score.per_dimension}
            rows.append([res.trace_id]
                        + [round3(by_metric[m]) for m in self.metrics]
                        + [round3(res.score.total)])
        return rows

    def plot_series(self) -> dict[MetricId, dict]:
        """Per metric: bin axis, band envelope, and every sim's series."""
        out: dict[MetricId, dict] = {}
        for metric in self.metrics:
            band = self.bands[metric]
            out[metric] = {
                "bin": list(range(band.bin_count)),
                "band_lower": [float(v) for v in band.lower()],
                "band_mu": [float(v) for v in band.mu],
                "band_upper": [float(v) for v in band.upper()],
                "sims": {
                    res.trace_id: [float(v) for v in res.trajectory.series[metric].values]
                    for res in self.results
                },
            }
        return out

    def to_json_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "bins": self.bins,
            "metrics": list(self.metrics),
            "weights": list(self.weights),
            "bands": {m: band_to_json_dict(b) for m, b in self.bands.items()},
            "gates": [gate_to_json_dict(g) for g in self.gates],
            "traces": [
                {
                    "trace_id": res.trace_id,
                    "pruned": res.pruned,
                    "verdicts": [
                        {
                            "gate": v.gate.name,
                            "metric": v.gate.metric,
                            "observed": v.observed,
                            "passed": v.passed,
                        }
                        for v in res.verdicts
                    ],
                    "score": None if res.score is None else score_to_json_dict(res.score),
                }
                for res in self.results
            ],
            "table": self.table_rows(),
            "plot": self.plot_series(),
        }


def target_from_bands(bands: Mapping[MetricId, GateBand],
                      metrics: Sequence[MetricId],
                      trace_id: str = "groundtruth-mu") -> Trajectory:
    """The scoring target: the band mean series, one per metric."""
    series = {}
    for metric in metrics:
        if metric not in bands:
            raise ValidationError(f"no band for metric {metric!r}")
        band = bands[metric]
        series[metric] = MetricSeries(metric, band.mu.copy(),
                                      np.ones(band.bin_count, dtype=bool))
    return Trajectory(trace_id, series)


def build_report(sims: Sequence[Trajectory],
                 bands: Mapping[MetricId, GateBand],
                 gates: Sequence[Gate] = (),
                 weights: "Sequence[float] | Mapping[MetricId, float] | None" = None,
                 window_stat: str = "mean",
                 delta: "str | DeltaFn | None" = None,
                 config_hash: str = "") -> ValidityReport:
    """Gate then score every sim against the band-mean target.

    Pruning precedes scoring: a trajectory that misses any gate carries its
    verdicts but no score. With an empty gate set nothing is pruned. An
    empty sim list yields an empty (but valid) report.
    """
    metrics = tuple(bands)
    if not metrics:
        raise ValidationError("no bands given")
    target = target_from_bands(bands, metrics)
    weight_list = _resolve_weights(weights, metrics)

    results = []
    for sim in sims:
        missing = [m for m in metrics if m not in sim.series]
        if missing:
            raise ValidationError(
                f"trajectory {sim.trace_id!r} lacks metric(s): {', '.join(missing)}")
        verdicts, pruned = evaluate_gates(sim, gates, window_stat) if gates else ([], False)
        score = None
        if not pruned:
            sim_view = Trajectory(sim.trace_id, {m: sim.series[m] for m in metrics})
            score = score_trajectory(sim_view, target, weight_list, delta)
        results.append(TraceResult(sim.trace_id, tuple(verdicts), pruned, score, sim))

    first_band = bands[metrics[0]]
    return ValidityReport(
        config_hash=config_hash,
        bins=first_band.bin_count,
        metrics=metrics,
        weights=tuple(weight_list),
        bands=dict(bands),
        gates=tuple(gates),
        results=tuple(results),
    )


def _resolve_weights(weights, metrics: Sequence[MetricId]) -> list[float]:
    if weights is None:
        return [1.0] * len(metrics)
    if isinstance(weights, Mapping):
        missing = [m for m in metrics if m not in weights]
        if missing:
            raise ValidationError(f"no weight for metric(s): {', '.join(missing)}")
        return [float(weights[m]) for m in metrics]
    out = [float(w) for w in weights]
    if len(out) != len(metrics):
        raise ValidationError(f"{len(metrics)} metrics but {len(out)} weights")
    return out


def score_table_csv(report: ValidityReport) -> str:
    """Render the summary table; cells use the same rounding as the JSON."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in report.table_rows():
        writer.writerow([fmt3(cell) if isinstance(cell, float) else cell
                         for cell in row])
    return buf.getvalue()


def plot_csv(report: ValidityReport, metric: MetricId) -> str:
    """Band envelope plus every sim's series, one row per bin."""
    series = report.plot_series().get(metric)
    if series is None:
        raise ValidationError(f"report has no metric {metric!r}")
    sim_ids = list(series["sims"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bin", "band_lower", "band_mu", "band_upper"] + sim_ids)
    for i in series["bin"]:
        row = [i, series["band_lower"][i], series["band_mu"][i],
               series["band_upper"][i]]
        row += [series["sims"][sid][i] for sid in sim_ids]
        writer.writerow(row)
    return buf.getvalue()
