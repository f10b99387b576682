"""Acceptance checks for the shipped pipeline.

Each test guards one headline behaviour end to end and prints a single
verdict line (run ``pytest -s tests/test_acceptance.py`` to stream them):

  1. validity totals decompose into per-dimension costs
  2. archetype costs order A < B < C on every seed
  3. the DTW implementation matches exhaustive path search exactly
  4. Gini closed forms and scale invariance
  5. groundtruth bands cover ~95.4% of draws from their own (mu, sigma)
  6. stock gate levels, and archetype pass/prune behaviour against them
  7. the CLI pipeline is byte-for-byte deterministic
  8. scoring a 100-bin trajectory stays under 50 ms

Numeric tolerances and runtime budgets are asserted, not just printed.
"""

from __future__ import annotations

import statistics
import time

import numpy as np
import pytest

from slalom.alignment import (AlignmentResult, WarpingPath, aggregate, dtw,
                              dtw_oracle, score_trajectory)
from slalom.band import build_band
from slalom.cli import main
from slalom.gates import (TUCKMAN_GATE_CENTERS, default_tuckman_gates,
                          evaluate_gates)
from slalom.metrics import gini_word_counts
from slalom.report import fmt3, round3, target_from_bands
from slalom.synth import ARCHETYPES, generate, reference_trajectories
from slalom.trace import InteractionEvent

METRICS = ("hierarchy", "divergence", "cohesion")


def _verdict(number: int, label: str, ok: bool, detail: str) -> None:
    print(f"acceptance {number} [{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, f"{label}: {detail}"


@pytest.fixture(scope="module")
def reference_target():
    """Bands from the stock reference ensemble, plus their mean target."""
    refs = reference_trajectories(15)
    bands = {metric: build_band(refs, metric) for metric in METRICS}
    return bands, target_from_bands(bands, METRICS)


def _unit_result(cost: float) -> AlignmentResult:
    return AlignmentResult(raw_cost=cost, normalized_cost=cost,
                           path=WarpingPath(((0, 0),)))


def test_1_validity_total_decomposes(reference_target):
    t0 = time.perf_counter()
    _, target = reference_target
    row1 = aggregate([_unit_result(c) for c in (0.031, 0.013, 0.052)])
    row2 = aggregate([_unit_result(c) for c in (0.018, 0.006, 0.024)])
    live = score_trajectory(generate(ARCHETYPES["B"](seed=11)), target)
    residual = abs(live.total
                   - sum(r.normalized_cost for r in live.per_dimension))
    ok = (abs(row1.total - (0.031 + 0.013 + 0.052)) <= 1e-9
          and fmt3(row1.total) == "0.096"
          and abs(round3(row2.total) - 0.049) <= 0.002
          and residual <= 1e-9)
    elapsed = time.perf_counter() - t0
    _verdict(1, "unit-weight totals decompose",
             ok and elapsed < 1.0,
             f"0.031+0.013+0.052 -> {fmt3(row1.total)}, second row -> "
             f"{fmt3(row2.total)}, live residual {residual:.1e}, "
             f"{elapsed:.2f}s")


def test_2_archetype_ordering_holds_on_every_seed(reference_target):
    _, target = reference_target
    t0 = time.perf_counter()
    bad_orderings = []
    bad_dimensions = []
    for seed in range(20):
        scores = {
            name: score_trajectory(generate(ARCHETYPES[name](seed=seed)),
                                   target)
            for name in ("A", "B", "C")
        }
        if not (scores["A"].total < scores["B"].total < scores["C"].total):
            bad_orderings.append(seed)
        for i, metric in enumerate(METRICS):
            costs = {name: scores[name].per_dimension[i].normalized_cost
                     for name in scores}
            if costs["C"] != max(costs.values()):
                bad_dimensions.append((seed, metric))
    elapsed = time.perf_counter() - t0
    ok = not bad_orderings and not bad_dimensions and elapsed < 10.0
    _verdict(2, "A < B < C totals, C worst on all dimensions",
             ok,
             f"20 seeds, ordering violations {bad_orderings}, "
             f"dimension violations {bad_dimensions}, {elapsed:.2f}s")


def test_3_dtw_matches_exhaustive_search():
    rng = np.random.default_rng(20260814)
    t0 = time.perf_counter()
    pairs = 600
    mismatches = 0
    for _ in range(pairs):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 7))
        # Quarter-grid values keep every cost sum exact in binary, so the
        # comparison below can demand strict float equality.
        s = rng.integers(0, 9, size=n) / 4.0
        t = rng.integers(0, 9, size=m) / 4.0
        fast = dtw(s, t)
        if fast.raw_cost != dtw_oracle(s, t):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    _verdict(3, "DTW equals exhaustive path search",
             mismatches == 0 and elapsed < 5.0,
             f"{pairs} pairs (lengths <= 6), {mismatches} mismatches, "
             f"{elapsed:.2f}s")


def _word_events(counts: dict[str, int]) -> list[InteractionEvent]:
    return [InteractionEvent(speaker, float(i), float(i) + 0.5, "w " * n)
            for i, (speaker, n) in enumerate(sorted(counts.items()))]


def test_4_gini_closed_forms_and_scale_invariance():
    t0 = time.perf_counter()
    roster = ["spk1", "spk2", "spk3", "spk4"]
    cases = [
        ({"spk1": 10, "spk2": 10, "spk3": 10, "spk4": 10}, 0.0),
        ({"spk1": 100}, 0.75),
        ({"spk1": 40, "spk2": 30, "spk3": 20, "spk4": 10}, 0.25),
    ]
    worst_form = 0.0
    for counts, expected in cases:
        got = gini_word_counts(_word_events(counts), roster=roster)
        worst_form = max(worst_form, abs(got - expected))
    base = {"spk1": 40, "spk2": 30, "spk3": 20, "spk4": 10}
    reference = gini_word_counts(_word_events(base), roster=roster)
    worst_scale = 0.0
    for k in (2, 10, 1000):
        scaled = {s: n * k for s, n in base.items()}
        got = gini_word_counts(_word_events(scaled), roster=roster)
        worst_scale = max(worst_scale, abs(got - reference))
    elapsed = time.perf_counter() - t0
    _verdict(4, "Gini closed forms and scale invariance",
             worst_form <= 1e-9 and worst_scale <= 1e-9,
             f"closed-form error {worst_form:.1e}, scale error "
             f"{worst_scale:.1e} for k in (2, 10, 1000), {elapsed:.2f}s")


def test_5_band_coverage_near_nominal_two_sigma():
    t0 = time.perf_counter()
    # Noise well above the sigma floor so the floor cannot widen any band.
    refs = reference_trajectories(15, noise_sigma=0.05, seed=77)
    rng = np.random.default_rng(5)
    worst = 0.0
    floored = 0
    for metric in METRICS:
        band = build_band(refs, metric)
        floored += int((band.sigma <= 0.01).sum())
        draws = rng.normal(band.mu, band.sigma,
                           size=(10_000, band.bin_count))
        freq = ((draws >= band.lower()) & (draws <= band.upper())).mean(axis=0)
        worst = max(worst, float(np.abs(freq - 0.954).max()))
    elapsed = time.perf_counter() - t0
    _verdict(5, "bands cover their own draws at ~95.4%",
             worst <= 0.02 and floored == 0 and elapsed < 5.0,
             f"10000 draws/bin, worst |freq - 0.954| = {worst:.4f}, "
             f"{floored} floored bins, {elapsed:.2f}s")


PUBLISHED_LEVELS = {
    ("Forming", "hierarchy"): 0.48,
    ("Storming", "hierarchy"): 0.37,
    ("Norming", "hierarchy"): 0.32,
    ("Performing", "hierarchy"): 0.35,
    ("Storming", "cohesion"): 0.40,
    ("Norming", "cohesion"): 0.50,
    ("Performing", "cohesion"): 0.42,
    ("Forming", "divergence"): 0.30,
}


def test_6_stock_gates_levels_and_archetype_verdicts():
    t0 = time.perf_counter()
    gates = default_tuckman_gates()
    levels_exact = all(TUCKMAN_GATE_CENTERS[key] == value
                       for key, value in PUBLISHED_LEVELS.items())
    corridors_centered = all(
        (gate.v_min + gate.v_max) / 2.0
        == pytest.approx(TUCKMAN_GATE_CENTERS[(gate.name, gate.metric)],
                         abs=1e-12)
        for gate in gates)
    a_failures = []
    c_passes = []
    for seed in range(20):
        _, pruned = evaluate_gates(generate(ARCHETYPES["A"](seed=seed)), gates)
        if pruned:
            a_failures.append(seed)
        verdicts, _ = evaluate_gates(generate(ARCHETYPES["C"](seed=seed)),
                                     gates)
        if not any(not v.passed and v.gate.metric == "cohesion"
                   for v in verdicts):
            c_passes.append(seed)
    elapsed = time.perf_counter() - t0
    ok = (len(gates) == 12 and levels_exact and corridors_centered
          and not a_failures and not c_passes)
    _verdict(6, "stock gate levels, A passes, C trips cohesion",
             ok,
             f"12 gates, published levels exact: {levels_exact}, A pruned on "
             f"seeds {a_failures}, C missed cohesion on seeds {c_passes}, "
             f"{elapsed:.2f}s")


def test_7_cli_pipeline_is_byte_deterministic(tmp_path):
    t0 = time.perf_counter()

    def run(argv):
        rc = main([str(a) for a in argv])
        assert rc == 0, argv

    reports = []
    for attempt in (1, 2):
        base = tmp_path / f"run{attempt}"
        logs, traj = base / "logs", base / "traj"
        bands, sims, out = base / "bands", base / "sims", base / "report"
        run(["synth", "corpus", "--groups", "15", "-o", logs])
        run(["extract", *sorted(logs.glob("*.jsonl")), "-o", traj])
        run(["groundtruth", *sorted(traj.glob("*.trajectory.json")),
             "-o", bands])
        for name in ("a", "b", "c"):
            run(["synth", "archetype", "--name", name, "--seed", "7",
                 "-o", sims])
        run(["score", *sorted(sims.glob("*.trajectory.json")),
             "--bands", bands, "--gates", "none", "-o", out])
        reports.append((out / "report.json").read_bytes())
    elapsed = time.perf_counter() - t0
    identical = reports[0] == reports[1]
    _verdict(7, "corpus -> extract -> groundtruth -> score is deterministic",
             identical and elapsed < 30.0,
             f"two full runs, report.json identical: {identical}, "
             f"{len(reports[0])} bytes, {elapsed:.2f}s")


def test_8_scoring_latency_under_50ms(reference_target):
    _, target = reference_target
    sim = generate(ARCHETYPES["A"](seed=3))
    score_trajectory(sim, target)  # warm-up
    samples = []
    for _ in range(5):
        t0 = time.perf_counter()
        score_trajectory(sim, target)
        samples.append((time.perf_counter() - t0) * 1000.0)
    median = statistics.median(samples)
    _verdict(8, "100-bin, 3-metric scoring latency",
             median < 50.0,
             f"median {median:.1f} ms over 5 runs (budget 50 ms)")
