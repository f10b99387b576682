"""Command-line interface.

Verbs mirror the pipeline stages:

    slalom synth corpus -o logs/ --groups 15        # demo interaction logs
    slalom extract -o traj/ logs/*.jsonl            # logs -> trajectories
    slalom groundtruth -o gt/ traj/*.json           # trajectories -> bands
    slalom gates -o gates.json                      # emit the default gate set
    slalom synth archetype --name A -o sims/        # metric-space sims
    slalom score -o out/ --bands gt/ sims/*.json    # gate + DTW report
    slalom report -o plots/ out/report.json         # per-metric plot CSVs
    slalom dump-categories                          # function-word table

Exit codes: 0 success, 2 bad input or configuration, 1 internal error.
Every flag mirrors a config key; a JSON config file may be named with
--config or the SLALOM_CONFIG environment variable, and flags win.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .band import band_from_json_dict, band_to_json_dict, build_band
from .categories import DEFAULT_CATEGORIES, dump_categories, load_categories
from .config import ENV_CONFIG, PipelineConfig, load_config
from .embedding import HashedEmbeddingProvider
from .errors import ConfigError, ParseError, SlalomError, ValidationError
from .gates import default_tuckman_gates, default_tuckman_windows, gates_from_band, \
    gates_from_json, gates_to_json
from .metrics import trajectory_csv_rows, trajectory_from_json_dict, \
    trajectory_to_json_dict
from .report import build_report, plot_csv, score_table_csv
from .synth import ARCHETYPES, demo_corpus, generate
from .trace import concatenate_sessions, bin_trace, normalize_timeline, parse_trace, \
    trace_to_jsonl


def _atomic_write(path: Path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _config_from_args(args) -> PipelineConfig:
    overrides = {}
    for key in ("bins", "trim_fraction", "trim_policy", "band_multiplier",
                "sigma_floor", "metrics", "fill", "gate_source",
                "gate_value_half_width", "gate_window_half_width",
                "window_stat", "delta", "embedding_dim", "embedding_seed",
                "seed", "workers"):
        overrides[key] = getattr(args, key, None)
    if getattr(args, "weight", None):
        weights = {}
        for item in args.weight:
            if "=" not in item:
                raise ConfigError(f"--weight expects metric=value, got {item!r}")
            name, _, value = item.partition("=")
            try:
                weights[name.strip()] = float(value)
            except ValueError:
                raise ConfigError(f"bad weight value in {item!r}") from None
        overrides["weights"] = weights
    return load_config(getattr(args, "config", None), overrides=overrides)


def _provider(config: PipelineConfig) -> HashedEmbeddingProvider:
    return HashedEmbeddingProvider(dim=config.embedding_dim,
                                   seed=config.embedding_seed)


def _categories(args):
    if getattr(args, "categories", None):
        return load_categories(Path(args.categories).read_text(encoding="utf-8"))
    return DEFAULT_CATEGORIES


def _extract_one(path: Path, config: PipelineConfig, provider, categories,
                 out_dir: Path) -> Path:
    from .metrics import extract_trajectory
    try:
        trace = parse_trace(path.read_bytes(), trace_id=path.stem.replace(".jsonl", ""))
    except (ParseError, ValidationError) as exc:
        line = getattr(exc, "line", None)
        where = f"{path}:{line}" if line else str(path)
        raise SlalomError(f"{where}: {exc}") from exc
    binned = bin_trace(normalize_timeline(trace), config.bins)
    traj = extract_trajectory(binned, metrics=config.metrics, provider=provider,
                              fill=config.fill, categories=categories)
    _write_trajectory(traj, out_dir)
    return out_dir / f"{traj.trace_id}.trajectory.json"


def _write_trajectory(traj, out_dir: Path) -> None:
    doc = trajectory_to_json_dict(traj)
    _atomic_write(out_dir / f"{traj.trace_id}.trajectory.json", _dump_json(doc))
    lines = ["bin,metric,value,was_filled"]
    for b, metric, value, was_filled in trajectory_csv_rows(traj):
        lines.append(f"{b},{metric},{value!r},{str(was_filled).lower()}")
    _atomic_write(out_dir / f"{traj.trace_id}.trajectory.csv", "\n".join(lines) + "\n")


def cmd_extract(args) -> int:
    config = _config_from_args(args)
    provider = _provider(config)
    categories = _categories(args)
    out_dir = Path(args.out)
    inputs = [Path(p) for p in args.inputs]
    if not inputs:
        raise ValidationError("no input logs given")

    if args.concat_sessions:
        sessions = []
        for path in inputs:
            try:
                sessions.append(parse_trace(path.read_bytes(),
                                            trace_id=path.stem.replace(".jsonl", "")))
            except (ParseError, ValidationError) as exc:
                line = getattr(exc, "line", None)
                where = f"{path}:{line}" if line else str(path)
                raise SlalomError(f"{where}: {exc}") from exc
        trace = concatenate_sessions(sessions, trim_fraction=config.trim_fraction,
                                     trim_policy=config.trim_policy,
                                     trace_id=args.trace_id)
        from .metrics import extract_trajectory
        binned = bin_trace(normalize_timeline(trace), config.bins)
        traj = extract_trajectory(binned, metrics=config.metrics, provider=provider,
                                  fill=config.fill, categories=categories)
        _write_trajectory(traj, out_dir)
        print(f"wrote 1 trajectory to {out_dir}")
        return 0

    if config.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(config.workers) as pool:
            list(pool.map(lambda p: _extract_one(p, config, provider, categories,
                                                 out_dir), inputs))
    else:
        for path in inputs:
            _extract_one(path, config, provider, categories, out_dir)
    print(f"wrote {len(inputs)} trajectories to {out_dir}")
    return 0


def _load_trajectories(paths) -> list:
    out = []
    for path in paths:
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SlalomError(f"{path}: not valid JSON ({exc})") from exc
        out.append(trajectory_from_json_dict(doc))
    return out


def cmd_groundtruth(args) -> int:
    config = _config_from_args(args)
    trajectories = _load_trajectories(args.inputs)
    if len(trajectories) < 2:
        raise ValidationError(
            f"ground truth needs at least 2 trajectories, got {len(trajectories)}")
    out_dir = Path(args.out)
    source_blob = json.dumps([trajectory_to_json_dict(t) for t in trajectories],
                             sort_keys=True, separators=(",", ":"))
    provenance = {"source_hash": _sha256(source_blob),
                  "config_hash": config.config_hash()}
    metrics = trajectories[0].metrics
    for metric in metrics:
        band = build_band(trajectories, metric, multiplier=config.band_multiplier,
                          sigma_floor=config.sigma_floor)
        _atomic_write(out_dir / f"band-{metric}.json",
                      _dump_json(band_to_json_dict(band, provenance)))
    print(f"wrote {len(metrics)} bands to {out_dir}")
    return 0


def _load_bands(band_dir) -> dict:
    band_dir = Path(band_dir)
    if band_dir.is_dir():
        paths = sorted(band_dir.glob("band-*.json"))
    else:
        paths = [band_dir]
    if not paths:
        raise ValidationError(f"no band files found under {band_dir}")
    bands = {}
    for path in paths:
        band = band_from_json_dict(json.loads(path.read_text(encoding="utf-8")))
        bands[band.metric] = band
    return bands


def cmd_gates(args) -> int:
    config = _config_from_args(args)
    if args.from_band:
        bands = _load_bands(args.from_band)
        windows = default_tuckman_windows(config.gate_window_half_width)
        gates = []
        for metric in sorted(bands):
            gates.extend(gates_from_band(bands[metric], windows))
    else:
        gates = default_tuckman_gates(config.gate_value_half_width,
                                      config.gate_window_half_width)
    text = gates_to_json(gates)
    if args.out:
        _atomic_write(Path(args.out), text)
        print(f"wrote {len(gates)} gates to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _resolve_gates(config: PipelineConfig, bands, gate_file: str | None):
    source = gate_file or config.gate_source
    if source == "none":
        return []
    if source == "tuckman-default":
        return default_tuckman_gates(config.gate_value_half_width,
                                     config.gate_window_half_width)
    if source == "band":
        windows = default_tuckman_windows(config.gate_window_half_width)
        gates = []
        for metric in bands:
            gates.extend(gates_from_band(bands[metric], windows))
        return gates
    return gates_from_json(Path(source).read_text(encoding="utf-8"))


def cmd_score(args) -> int:
    config = _config_from_args(args)
    bands = _load_bands(args.bands)
    ordered = {m: bands[m] for m in config.metrics if m in bands}
    missing = [m for m in config.metrics if m not in bands]
    if missing:
        raise ValidationError(f"no band for metric(s): {', '.join(missing)}")
    gates = _resolve_gates(config, ordered, args.gates)
    sims = _load_trajectories(args.sims)
    report = build_report(sims, ordered, gates, weights=config.weights,
                          window_stat=config.window_stat,
                          delta=None if config.delta == "abs" else config.delta,
                          config_hash=config.config_hash())
    out_dir = Path(args.out)
    _atomic_write(out_dir / "report.json", _dump_json(report.to_json_dict()))
    _atomic_write(out_dir / "report.csv", score_table_csv(report))
    print(f"scored {len(sims)} trajectories -> {out_dir}")
    return 0


def cmd_report(args) -> int:
    path = Path(args.report)
    doc = json.loads(path.read_text(encoding="utf-8"))
    try:
        metrics = doc["metrics"]
        plot = doc["plot"]
    except KeyError as exc:
        raise ValidationError(f"{path}: missing report key {exc.args[0]!r}") from exc
    out_dir = Path(args.out)
    for metric in metrics:
        series = plot[metric]
        sim_ids = list(series["sims"])
        lines = [",".join(["bin", "band_lower", "band_mu", "band_upper"] + sim_ids)]
        for i in series["bin"]:
            row = [str(i), repr(series["band_lower"][i]), repr(series["band_mu"][i]),
                   repr(series["band_upper"][i])]
            row += [repr(series["sims"][sid][i]) for sid in sim_ids]
            lines.append(",".join(row))
        _atomic_write(out_dir / f"plot-{metric}.csv", "\n".join(lines) + "\n")
    print(f"wrote {len(metrics)} plot files to {out_dir}")
    return 0


def cmd_synth(args) -> int:
    config = _config_from_args(args)
    out_dir = Path(args.out)
    if args.what == "corpus":
        traces = demo_corpus(n_groups=args.groups, seed=config.seed,
                             bins=config.bins)
        for trace in traces:
            _atomic_write(out_dir / f"{trace.trace_id}.jsonl", trace_to_jsonl(trace))
        print(f"wrote {len(traces)} demo logs to {out_dir}")
        return 0
    if args.what == "archetype":
        name = args.name.upper()
        if name not in ARCHETYPES:
            raise ValidationError(f"unknown archetype {args.name!r}; pick A, B or C")
        archetype = ARCHETYPES[name](seed=config.seed, noise_sigma=args.noise)
        traj = generate(archetype, bins=config.bins,
                        trace_id=args.trace_id or name)
        _write_trajectory(traj, out_dir)
        print(f"wrote archetype {name} trajectory to {out_dir}")
        return 0
    raise ValidationError(f"unknown synth target {args.what!r}")


def cmd_dump_categories(args) -> int:
    text = dump_categories()
    if args.out:
        _atomic_write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline configuration")
    group.add_argument("--config", help=f"JSON config file (or ${ENV_CONFIG})")
    group.add_argument("--bins", type=int)
    group.add_argument("--trim-fraction", dest="trim_fraction", type=float)
    group.add_argument("--trim-policy", dest="trim_policy",
                       choices=("after-first", "all", "none"))
    group.add_argument("--multiplier", dest="band_multiplier", type=float)
    group.add_argument("--sigma-floor", dest="sigma_floor", type=float)
    group.add_argument("--metrics", help="comma-separated metric list")
    group.add_argument("--fill", choices=("interpolate", "hold"))
    group.add_argument("--gate-source", dest="gate_source")
    group.add_argument("--gate-value-half-width", dest="gate_value_half_width",
                       type=float)
    group.add_argument("--gate-window-half-width", dest="gate_window_half_width",
                       type=float)
    group.add_argument("--window-stat", dest="window_stat",
                       choices=("mean", "min", "max"))
    group.add_argument("--weight", action="append", metavar="METRIC=W")
    group.add_argument("--delta", choices=("abs", "squared"))
    group.add_argument("--embedding-dim", dest="embedding_dim", type=int)
    group.add_argument("--embedding-seed", dest="embedding_seed", type=int)
    group.add_argument("--seed", type=int)
    group.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slalom",
        description="Validate simulated group interactions against "
                    "ground-truth trajectory bands.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="interaction logs -> metric trajectories")
    p.add_argument("inputs", nargs="+", metavar="LOG.jsonl")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--concat-sessions", action="store_true",
                   help="treat the inputs as ordered sessions of one trace "
                        "(applies the trim policy)")
    p.add_argument("--trace-id", help="trace id for --concat-sessions")
    p.add_argument("--categories", help="function-word table file")
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("groundtruth", help="trajectories -> per-metric bands")
    p.add_argument("inputs", nargs="+", metavar="TRAJECTORY.json")
    p.add_argument("-o", "--out", required=True, help="output directory")
    _add_config_flags(p)
    p.set_defaults(func=cmd_groundtruth)

    p = sub.add_parser("gates", help="emit a gate set (defaults or band-derived)")
    p.add_argument("-o", "--out", help="output file (stdout when omitted)")
    p.add_argument("--from-band", dest="from_band",
                   help="band file or directory to derive corridors from")
    _add_config_flags(p)
    p.set_defaults(func=cmd_gates)

    p = sub.add_parser("score", help="gate + DTW-score sims against bands")
    p.add_argument("sims", nargs="*", metavar="TRAJECTORY.json")
    p.add_argument("--bands", required=True, help="band file or directory")
    p.add_argument("--gates", help="gate file, 'tuckman-default', 'band' or 'none'")
    p.add_argument("-o", "--out", required=True, help="output directory")
    _add_config_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="report JSON -> per-metric plot CSVs")
    p.add_argument("report", metavar="REPORT.json")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate demo logs or archetype sims")
    p.add_argument("what", choices=("corpus", "archetype"))
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--groups", type=int, default=15, help="corpus: group count")
    p.add_argument("--name", default="A", help="archetype: A, B or C")
    p.add_argument("--noise", type=float, default=0.02, help="archetype noise sigma")
    p.add_argument("--trace-id", help="archetype trajectory id")
    _add_config_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dump-categories", help="print the function-word table")
    p.add_argument("-o", "--out", help="output file (stdout when omitted)")
    p.set_defaults(func=cmd_dump_categories)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SlalomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
