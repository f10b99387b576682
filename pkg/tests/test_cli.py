"""End-to-end command-line behaviour on temp workspaces."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from slalom.categories import DEFAULT_CATEGORIES, load_categories
from slalom.cli import main


def _mini_log(path: Path, bad_line: str | None = None) -> Path:
    # the first two utterances overlap tightly so at least one bin holds two
    # speakers (keeps divergence and cohesion defined somewhere)
    rows = [
        {"speaker_id": "ana", "start_time": 0.0, "end_time": 1.0,
         "text": "we should start now", "segment": "s1"},
        {"speaker_id": "ben", "start_time": 0.2, "end_time": 1.2,
         "text": "yes we should do it", "segment": "s1"},
        {"speaker_id": "ana", "start_time": 50.0, "end_time": 52.0,
         "text": "the middle part is here", "segment": "s1"},
        {"speaker_id": "ben", "start_time": 98.0, "end_time": 100.0,
         "text": "wrapping it all up", "segment": "s1"},
    ]
    lines = [json.dumps(r) for r in rows]
    if bad_line is not None:
        lines.insert(1, bad_line)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Archetype sims and a reference band set, all built through the CLI."""
    root = tmp_path_factory.mktemp("ws")
    refs = root / "refs"
    for k in range(5):
        assert main(["synth", "archetype", "--name", "A", "--seed", str(100 + k),
                     "--trace-id", f"ref{k}", "-o", str(refs)]) == 0
    bands = root / "bands"
    ref_files = sorted(str(p) for p in refs.glob("*.trajectory.json"))
    assert main(["groundtruth", "-o", str(bands)] + ref_files) == 0
    sims = root / "sims"
    for name in "ABC":
        assert main(["synth", "archetype", "--name", name, "--seed", "50",
                     "--trace-id", name, "-o", str(sims)]) == 0
    return root


def _sim_files(workspace) -> list[str]:
    return [str(workspace / "sims" / f"{n}.trajectory.json") for n in "ABC"]


class TestHelpAndVersion:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.strip()

    def test_missing_command_exits_with_usage(self, capsys):
        with pytest.raises(SystemExit):
            main([])


class TestDumpCategories:
    def test_stdout_round_trips(self, capsys):
        assert main(["dump-categories"]) == 0
        table = load_categories(capsys.readouterr().out)
        assert table == DEFAULT_CATEGORIES

    def test_file_output(self, tmp_path):
        out = tmp_path / "cats.tsv"
        assert main(["dump-categories", "-o", str(out)]) == 0
        assert load_categories(out.read_text()) == DEFAULT_CATEGORIES


class TestSynth:
    def test_corpus_files(self, tmp_path, capsys):
        out = tmp_path / "logs"
        assert main(["synth", "corpus", "--groups", "2", "-o", str(out)]) == 0
        files = sorted(p.name for p in out.glob("*.jsonl"))
        assert files == ["group00.jsonl", "group01.jsonl"]
        assert "wrote 2 demo logs" in capsys.readouterr().out

    def test_corpus_deterministic(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            assert main(["synth", "corpus", "--groups", "1", "-o", str(out)]) == 0
        assert (a / "group00.jsonl").read_bytes() == (b / "group00.jsonl").read_bytes()

    def test_corpus_seed_flag(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["synth", "corpus", "--groups", "1", "-o", str(a)]) == 0
        assert main(["synth", "corpus", "--groups", "1", "--seed", "7", "-o", str(b)]) == 0
        assert (a / "group00.jsonl").read_bytes() != (b / "group00.jsonl").read_bytes()

    def test_archetype_lowercase_name(self, tmp_path):
        out = tmp_path / "sims"
        assert main(["synth", "archetype", "--name", "b", "-o", str(out)]) == 0
        doc = json.loads((out / "B.trajectory.json").read_text())
        assert doc["trace_id"] == "B"
        assert doc["bins"] == 100

    def test_archetype_unknown_name(self, tmp_path, capsys):
        assert main(["synth", "archetype", "--name", "Z", "-o", str(tmp_path)]) == 2
        assert "unknown archetype" in capsys.readouterr().err


class TestExtract:
    def test_writes_json_and_csv(self, tmp_path, capsys):
        log = _mini_log(tmp_path / "demo.jsonl")
        out = tmp_path / "traj"
        assert main(["extract", "-o", str(out), str(log)]) == 0
        assert "wrote 1 trajectories" in capsys.readouterr().out
        doc = json.loads((out / "demo.trajectory.json").read_text())
        assert doc["trace_id"] == "demo"
        assert doc["bins"] == 100
        assert {s["metric"] for s in doc["series"]} == {"hierarchy", "divergence", "cohesion"}
        rows = (out / "demo.trajectory.csv").read_text().splitlines()
        assert rows[0] == "bin,metric,value,was_filled"
        assert len(rows) == 1 + 3 * 100

    def test_bins_flag(self, tmp_path):
        log = _mini_log(tmp_path / "demo.jsonl")
        out = tmp_path / "traj"
        assert main(["extract", "--bins", "20", "-o", str(out), str(log)]) == 0
        assert json.loads((out / "demo.trajectory.json").read_text())["bins"] == 20

    def test_deterministic(self, tmp_path):
        log = _mini_log(tmp_path / "demo.jsonl")
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            assert main(["extract", "-o", str(out), str(log)]) == 0
        assert (a / "demo.trajectory.json").read_bytes() == \
            (b / "demo.trajectory.json").read_bytes()

    def test_parse_error_names_file_and_line(self, tmp_path, capsys):
        log = _mini_log(tmp_path / "broken.jsonl", bad_line="{oops")
        assert main(["extract", "-o", str(tmp_path / "t"), str(log)]) == 2
        err = capsys.readouterr().err
        assert f"{log}:2" in err

    def test_missing_input_file(self, tmp_path, capsys):
        missing = tmp_path / "nope.jsonl"
        assert main(["extract", "-o", str(tmp_path / "t"), str(missing)]) == 2
        assert "error:" in capsys.readouterr().err

    def test_concat_sessions(self, tmp_path):
        s1 = _mini_log(tmp_path / "sess1.jsonl")
        s2 = _mini_log(tmp_path / "sess2.jsonl")
        out = tmp_path / "traj"
        assert main(["extract", "--concat-sessions", "--trace-id", "both",
                     "--trim-fraction", "0", "-o", str(out), str(s1), str(s2)]) == 0
        doc = json.loads((out / "both.trajectory.json").read_text())
        assert doc["trace_id"] == "both"

    def test_concat_default_id_joins_sessions(self, tmp_path):
        s1 = _mini_log(tmp_path / "sess1.jsonl")
        s2 = _mini_log(tmp_path / "sess2.jsonl")
        out = tmp_path / "traj"
        assert main(["extract", "--concat-sessions", "-o", str(out),
                     str(s1), str(s2)]) == 0
        assert (out / "sess1+sess2.trajectory.json").exists()

    def test_workers_flag_changes_nothing_observable(self, tmp_path):
        logs = [str(_mini_log(tmp_path / f"w{i}.jsonl")) for i in range(3)]
        seq = tmp_path / "seq"
        par = tmp_path / "par"
        assert main(["extract", "-o", str(seq)] + logs) == 0
        assert main(["extract", "--workers", "3", "-o", str(par)] + logs) == 0
        for i in range(3):
            name = f"w{i}.trajectory.json"
            assert (seq / name).read_bytes() == (par / name).read_bytes()


class TestConfigResolution:
    def test_config_file_flag(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bins": 30}))
        log = _mini_log(tmp_path / "demo.jsonl")
        out = tmp_path / "t"
        assert main(["extract", "--config", str(cfg), "-o", str(out), str(log)]) == 0
        assert json.loads((out / "demo.trajectory.json").read_text())["bins"] == 30

    def test_env_variable(self, tmp_path, monkeypatch):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bins": 35}))
        monkeypatch.setenv("SLALOM_CONFIG", str(cfg))
        log = _mini_log(tmp_path / "demo.jsonl")
        out = tmp_path / "t"
        assert main(["extract", "-o", str(out), str(log)]) == 0
        assert json.loads((out / "demo.trajectory.json").read_text())["bins"] == 35

    def test_flag_beats_config_file(self, tmp_path, monkeypatch):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bins": 35}))
        monkeypatch.setenv("SLALOM_CONFIG", str(cfg))
        log = _mini_log(tmp_path / "demo.jsonl")
        out = tmp_path / "t"
        assert main(["extract", "--bins", "15", "-o", str(out), str(log)]) == 0
        assert json.loads((out / "demo.trajectory.json").read_text())["bins"] == 15

    def test_unknown_config_key_fails(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bends": 30}))
        log = _mini_log(tmp_path / "demo.jsonl")
        code = main(["extract", "--config", str(cfg), "-o", str(tmp_path / "t"), str(log)])
        assert code == 2
        assert "bends" in capsys.readouterr().err


class TestGroundtruth:
    def test_band_files(self, workspace):
        bands = workspace / "bands"
        names = sorted(p.name for p in bands.glob("band-*.json"))
        assert names == ["band-cohesion.json", "band-divergence.json",
                         "band-hierarchy.json"]
        doc = json.loads((bands / "band-hierarchy.json").read_text())
        assert doc["n_traces"] == 5
        assert doc["bins"] == 100
        assert len(doc["provenance"]["source_hash"]) == 64
        assert len(doc["provenance"]["config_hash"]) == 64

    def test_rerun_is_byte_identical(self, workspace, tmp_path):
        ref_files = sorted(str(p) for p in (workspace / "refs").glob("*.trajectory.json"))
        again = tmp_path / "bands2"
        assert main(["groundtruth", "-o", str(again)] + ref_files) == 0
        for name in ("band-hierarchy.json", "band-divergence.json", "band-cohesion.json"):
            assert (again / name).read_bytes() == (workspace / "bands" / name).read_bytes()

    def test_needs_two_inputs(self, workspace, tmp_path, capsys):
        [one] = sorted((workspace / "refs").glob("ref0.trajectory.json"))
        assert main(["groundtruth", "-o", str(tmp_path), str(one)]) == 2
        assert "at least 2" in capsys.readouterr().err


class TestGates:
    def test_stdout_defaults(self, capsys):
        assert main(["gates"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc) == 12
        assert {g["name"] for g in doc} == {"Forming", "Storming", "Norming", "Performing"}

    def test_file_output(self, tmp_path):
        out = tmp_path / "gates.json"
        assert main(["gates", "-o", str(out)]) == 0
        assert len(json.loads(out.read_text())) == 12

    def test_from_band(self, workspace, tmp_path):
        out = tmp_path / "gates.json"
        assert main(["gates", "--from-band", str(workspace / "bands"),
                     "-o", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert len(doc) == 12
        # band corridors differ from the published defaults
        hierarchy_forming = next(
            g for g in doc if g["metric"] == "hierarchy" and g["name"] == "Forming")
        assert hierarchy_forming["v_min"] != pytest.approx(0.38)


class TestScore:
    def test_report_files_and_ordering(self, workspace, tmp_path, capsys):
        out = tmp_path / "scored"
        code = main(["score", "--bands", str(workspace / "bands"),
                     "--gates", "none", "-o", str(out)] + _sim_files(workspace))
        assert code == 0
        assert "scored 3 trajectories" in capsys.readouterr().out
        table = list(csv.reader((out / "report.csv").read_text().splitlines()))
        assert table[0] == ["Sim", "Hierarchy", "Divergence", "Cohesion", "Total"]
        totals = {row[0]: float(row[4]) for row in table[1:]}
        assert totals["A"] < totals["B"] < totals["C"]

    def test_json_and_csv_tables_agree(self, workspace, tmp_path):
        out = tmp_path / "scored"
        main(["score", "--bands", str(workspace / "bands"), "--gates", "none",
              "-o", str(out)] + _sim_files(workspace))
        doc = json.loads((out / "report.json").read_text())
        table = list(csv.reader((out / "report.csv").read_text().splitlines()))
        assert table[0] == doc["table"][0]
        for csv_row, json_row in zip(table[1:], doc["table"][1:]):
            assert csv_row[0] == json_row[0]
            for cell, value in zip(csv_row[1:], json_row[1:]):
                assert float(cell) == value

    def test_scoring_is_deterministic(self, workspace, tmp_path):
        outs = [tmp_path / "s1", tmp_path / "s2"]
        for out in outs:
            assert main(["score", "--bands", str(workspace / "bands"),
                         "--gates", "none", "-o", str(out)] + _sim_files(workspace)) == 0
        assert (outs[0] / "report.json").read_bytes() == (outs[1] / "report.json").read_bytes()

    def test_tuckman_gates_prune_the_runaway(self, workspace, tmp_path):
        out = tmp_path / "scored"
        assert main(["score", "--bands", str(workspace / "bands"),
                     "--gates", "tuckman-default", "-o", str(out)]
                    + _sim_files(workspace)) == 0
        doc = json.loads((out / "report.json").read_text())
        by_id = {t["trace_id"]: t for t in doc["traces"]}
        assert by_id["A"]["pruned"] is False
        assert by_id["C"]["pruned"] is True
        assert by_id["C"]["score"] is None
        assert len(by_id["C"]["verdicts"]) == 12
        csv_text = (out / "report.csv").read_text()
        assert "PRUNED(" in csv_text

    def test_gate_file_input(self, workspace, tmp_path):
        gate_file = tmp_path / "gates.json"
        assert main(["gates", "-o", str(gate_file)]) == 0
        out = tmp_path / "scored"
        assert main(["score", "--bands", str(workspace / "bands"),
                     "--gates", str(gate_file), "-o", str(out)]
                    + _sim_files(workspace)) == 0
        doc = json.loads((out / "report.json").read_text())
        assert len(doc["gates"]) == 12

    def test_weight_flags(self, workspace, tmp_path):
        out = tmp_path / "scored"
        assert main(["score", "--bands", str(workspace / "bands"), "--gates", "none",
                     "--weight", "hierarchy=2", "--weight", "divergence=1",
                     "--weight", "cohesion=0.5", "-o", str(out)]
                    + _sim_files(workspace)) == 0
        doc = json.loads((out / "report.json").read_text())
        assert doc["weights"] == [2.0, 1.0, 0.5]

    def test_bad_weight_flag(self, workspace, tmp_path, capsys):
        code = main(["score", "--bands", str(workspace / "bands"),
                     "--weight", "hierarchy", "-o", str(tmp_path / "s")]
                    + _sim_files(workspace))
        assert code == 2
        assert "metric=value" in capsys.readouterr().err

    def test_missing_band_for_metric(self, workspace, tmp_path, capsys):
        partial = tmp_path / "partial"
        partial.mkdir()
        src = workspace / "bands" / "band-hierarchy.json"
        (partial / "band-hierarchy.json").write_bytes(src.read_bytes())
        code = main(["score", "--bands", str(partial), "-o", str(tmp_path / "s")]
                    + _sim_files(workspace))
        assert code == 2
        assert "divergence" in capsys.readouterr().err

    def test_empty_sim_list_still_reports(self, workspace, tmp_path):
        out = tmp_path / "scored"
        assert main(["score", "--bands", str(workspace / "bands"),
                     "--gates", "none", "-o", str(out)]) == 0
        table = (out / "report.csv").read_text().splitlines()
        assert table == ["Sim,Hierarchy,Divergence,Cohesion,Total"]


class TestReportPlots:
    def test_plot_csv_per_metric(self, workspace, tmp_path):
        scored = tmp_path / "scored"
        assert main(["score", "--bands", str(workspace / "bands"), "--gates", "none",
                     "-o", str(scored)] + _sim_files(workspace)) == 0
        plots = tmp_path / "plots"
        assert main(["report", str(scored / "report.json"), "-o", str(plots)]) == 0
        names = sorted(p.name for p in plots.glob("plot-*.csv"))
        assert names == ["plot-cohesion.csv", "plot-divergence.csv",
                         "plot-hierarchy.csv"]
        rows = list(csv.reader((plots / "plot-hierarchy.csv").read_text().splitlines()))
        assert rows[0] == ["bin", "band_lower", "band_mu", "band_upper", "A", "B", "C"]
        assert len(rows) == 1 + 100
        for cell in rows[1][1:]:
            float(cell)

    def test_report_missing_key(self, tmp_path, capsys):
        bad = tmp_path / "report.json"
        bad.write_text(json.dumps({"metrics": ["hierarchy"]}))
        assert main(["report", str(bad), "-o", str(tmp_path / "p")]) == 2
        assert "plot" in capsys.readouterr().err
