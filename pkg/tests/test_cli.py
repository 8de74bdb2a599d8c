"""End-to-end command-line tests: config plumbing, exit codes, JSON
determinism, CSV export, and the golden corpus runner."""

import json
import os
from pathlib import Path

import pytest

from torushom.cli import (
    RunConfig,
    build_config,
    main,
    parse_config_text,
    parse_int,
    result_bytes,
)
from torushom.errors import ConfigError

GOLDEN_DIR = Path(__file__).parent / "golden"


def run_json(tmp_path, argv):
    """Run main with --out and return (exit_code, result dict)."""
    out = tmp_path / "out.json"
    code = main(argv + ["--out", str(out)])
    doc = json.loads(out.read_text()) if out.exists() else None
    return code, (doc["result"] if doc else None)


class TestRunConfig:
    def test_text_round_trip(self):
        cfg = RunConfig(
            command="sample", h="wr", weights="1,2,1", m=4, d=2,
            steps=1000, burn_in=10, thin=7, seed=42, out="x.json",
        )
        assert RunConfig.from_text(cfg.to_text()) == cfg

    def test_json_round_trip(self):
        cfg = RunConfig(command="corpus", golden_dir="g", update=True)
        assert RunConfig.from_mapping(cfg.to_json_dict()) == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.from_mapping({"command": "count", "mm": 2})

    def test_unknown_command_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.from_mapping({"command": "paint"})

    def test_missing_command_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.from_text("m=2\n")

    def test_bool_coercion(self):
        assert RunConfig.from_text("command=corpus\nupdate=true\n").update
        assert not RunConfig.from_text("command=corpus\nupdate=no\n").update
        with pytest.raises(ConfigError):
            RunConfig.from_text("command=corpus\nupdate=maybe\n")

    def test_parse_int_forms(self):
        assert parse_int("1e6", "steps") == 1_000_000
        assert parse_int("250", "steps") == 250
        assert parse_int(7, "steps") == 7
        with pytest.raises(ConfigError):
            parse_int("1.5", "steps")
        with pytest.raises(ConfigError):
            parse_int("many", "steps")

    def test_config_text_comments_and_errors(self):
        assert parse_config_text("# note\nm=2\n\nd = 3\n") == {"m": "2", "d": "3"}
        with pytest.raises(ConfigError):
            parse_config_text("just words\n")
        with pytest.raises(ConfigError):
            parse_config_text("{not json")


class TestConfigMerging:
    def test_flags_override_file(self, tmp_path):
        cfile = tmp_path / "run.cfg"
        cfile.write_text("h=k3\nm=2\nd=3\nseed=9\n")
        cfg = build_config(["count", "--config", str(cfile), "--d", "2"])
        assert (cfg.h, cfg.m, cfg.d, cfg.seed) == ("k3", 2, 2, 9)

    def test_json_config_file(self, tmp_path):
        cfile = tmp_path / "run.json"
        cfile.write_text(json.dumps({"h": "wr", "weights": "1,2,1"}))
        cfg = build_config(["analyze", "--config", str(cfile)])
        assert cfg.h == "wr" and cfg.weights == "1,2,1"

    def test_subcommand_beats_config_command(self, tmp_path):
        cfile = tmp_path / "run.cfg"
        cfile.write_text("command=sample\nh=k3\n")
        cfg = build_config(["analyze", "--config", str(cfile)])
        assert cfg.command == "analyze"

    def test_missing_config_file(self, capsys):
        assert main(["analyze", "--config", "/nonexistent.cfg"]) == 2
        assert "config error" in capsys.readouterr().err


class TestAnalyzeCommand:
    def test_balanced_split_report(self, tmp_path):
        code, res = run_json(tmp_path, ["analyze", "--h", "kq:5"])
        assert code == 0
        assert res["eta"] == "6"
        assert res["pair_count"] == 20
        assert res["equipartition"] == "transitive"

    def test_two_class_swap_report(self, tmp_path):
        code, res = run_json(tmp_path, ["analyze", "--h", "ind"])
        assert code == 0
        assert res["pair_count"] == 2
        assert res["equipartition"] == "two-class-swap"
        assert {"a": ["in", "out"], "b": ["out"]} in res["maximal_pairs"]

    def test_blowup_summary(self, tmp_path):
        code, res = run_json(
            tmp_path, ["analyze", "--h", "ind", "--weights", "3/2,1"]
        )
        assert code == 0
        assert res["blowup"]["scale_c"] == 2
        assert res["blowup"]["block_sizes"] == [3, 2]
        assert res["blowup"]["pair_bijection_ok"] is True

    def test_target_graph_from_file(self, tmp_path):
        hfile = tmp_path / "hard_core.txt"
        hfile.write_text("colors 2\nw 0 3/2\ne 0 1\ne 1 1\n")
        code, res = run_json(tmp_path, ["analyze", "--h", str(hfile)])
        assert code == 0
        assert res["eta"] == "5/2"
        assert res["weights"] == ["3/2", "1"]

    def test_file_parse_error_reports_line(self, tmp_path, capsys):
        hfile = tmp_path / "bad.txt"
        hfile.write_text("colors 2\nedge 0 1\n")
        assert main(["analyze", "--h", str(hfile)]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_summary_line(self, capsys):
        assert main(["analyze", "--h", "wr"]) == 0
        captured = capsys.readouterr()
        assert "eta=4 pairs=2 class=transitive" in captured.err
        json.loads(captured.out)  # stdout carries the document


class TestCountCommand:
    def test_both_routes(self, tmp_path):
        code, res = run_json(
            tmp_path, ["count", "--h", "k3", "--m", "2", "--d", "2"]
        )
        assert code == 0
        assert res["z"] == "18"
        assert res["z_brute"] == res["z_transfer"] == "18"

    def test_single_route(self, tmp_path):
        code, res = run_json(
            tmp_path,
            ["count", "--h", "k4loop", "--m", "2", "--d", "3",
             "--method", "transfer"],
        )
        assert code == 0
        assert res["z"] == "65536" and res["route"] == "transfer"

    def test_weighted_value_is_exact(self, tmp_path):
        code, res = run_json(
            tmp_path,
            ["count", "--h", "ind", "--weights", "1/3,1", "--m", "4",
             "--d", "1"],
        )
        assert code == 0
        # 1 + 4*lam + 2*lam^2 at lam=1/3
        assert res["z"] == "23/9"

    def test_budget_exit_code(self, capsys):
        assert main(["count", "--h", "k8", "--m", "6", "--d", "3"]) == 3
        assert "budget error" in capsys.readouterr().err

    def test_bad_method(self, capsys):
        assert main(["count", "--h", "k3", "--method", "magic"]) == 2

    def test_odd_torus_rejected(self, capsys):
        assert main(["count", "--h", "k3", "--m", "3", "--d", "2"]) == 2

    def test_bad_weights_length(self, capsys):
        assert main(["count", "--h", "k3", "--weights", "1,1"]) == 2


class TestSampleCommand:
    def test_trace_structure(self, tmp_path):
        code, res = run_json(
            tmp_path,
            ["sample", "--h", "ind", "--m", "2", "--d", "2",
             "--steps", "400", "--thin", "40", "--seed", "3"],
        )
        assert code == 0
        assert len(res["trace"]) == 10
        rec = res["trace"][-1]
        assert rec["step"] == 400
        assert rec["kind"] in ("pure", "exceptional")
        assert sum(rec["histogram_even"].values()) == 2
        assert sum(rec["histogram_odd"].values()) == 2

    def test_scientific_steps_accepted(self, tmp_path):
        code, res = run_json(
            tmp_path,
            ["sample", "--h", "ind", "--m", "2", "--d", "2",
             "--steps", "1e3", "--seed", "1"],
        )
        assert code == 0
        assert res["steps"] == 1000

    def test_seeded_rerun_is_byte_identical(self, tmp_path):
        argv = ["sample", "--h", "k3", "--m", "2", "--d", "2",
                "--steps", "500", "--seed", "5"]
        _, first = run_json(tmp_path, argv)
        _, second = run_json(tmp_path, argv)
        assert result_bytes(first) == result_bytes(second)

    def test_different_seed_changes_trace(self, tmp_path):
        base = ["sample", "--h", "k3", "--m", "2", "--d", "2",
                "--steps", "500"]
        _, first = run_json(tmp_path, base + ["--seed", "1"])
        _, second = run_json(tmp_path, base + ["--seed", "2"])
        assert result_bytes(first) != result_bytes(second)


class TestInfluenceCommand:
    def test_exact_comparison(self, tmp_path):
        code, res = run_json(
            tmp_path,
            ["influence", "--h", "wr", "--m", "2", "--d", "2",
             "--x", "antipodal", "--k", "1", "--l", "1"],
        )
        assert code == 0
        assert res["relation"] == "same-side"
        assert res["ratio_target"] == "2"
        assert res["conditional"]["target"] == [["1", "2"], ["1", "2"], ["0", "1"]]
        assert res["conditional"]["d_inf_distance"] == ["1", "9"]

    def test_label_and_index_agree(self, tmp_path):
        by_label = run_json(
            tmp_path,
            ["influence", "--h", "ind", "--m", "2", "--d", "2",
             "--x", "antipodal", "--k", "in", "--l", "in"],
        )[1]
        by_index = run_json(
            tmp_path,
            ["influence", "--h", "ind", "--m", "2", "--d", "2",
             "--x", "antipodal", "--k", "0", "--l", "0"],
        )[1]
        assert result_bytes(by_label) == result_bytes(by_index)

    def test_observed_color_defaults_to_pinned(self, tmp_path):
        code, res = run_json(
            tmp_path,
            ["influence", "--h", "wr", "--m", "2", "--d", "2",
             "--x", "far-odd", "--l", "1"],
        )
        assert code == 0
        assert res["observe_color"] == "1"
        assert res["relation"] == "cross-side"

    def test_empirical_block(self, tmp_path):
        code, res = run_json(
            tmp_path,
            ["influence", "--h", "ind", "--m", "2", "--d", "2",
             "--x", "3", "--k", "in", "--l", "in", "--steps", "4000",
             "--seed", "2"],
        )
        assert code == 0
        emp = res["empirical"]
        assert emp["n_samples"] == 3600
        assert 0.0 <= emp["p_conditional"] <= 1.0
        assert emp["stderr"] > 0
        # pinned "in" at the same-side vertex raises the observed rate
        exact = res["conditional"]["exact"][0]
        p_cond = int(exact[0]) / int(exact[1])
        assert abs(emp["p_conditional"] - p_cond) < 5 * emp["stderr"] + 0.02

    def test_missing_pin_color(self, capsys):
        assert main(["influence", "--h", "wr", "--m", "2", "--d", "2"]) == 2
        assert "--l" in capsys.readouterr().err

    def test_bad_pin_vertex(self, capsys):
        assert main(
            ["influence", "--h", "wr", "--m", "2", "--d", "2",
             "--x", "99", "--l", "1"]
        ) == 2

    def test_csv_export(self, tmp_path):
        csv_path = tmp_path / "vec.csv"
        code, _ = run_json(
            tmp_path,
            ["influence", "--h", "wr", "--m", "2", "--d", "2",
             "--x", "antipodal", "--l", "1", "--csv", str(csv_path)],
        )
        assert code == 0
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0].startswith("color,occupation_target")
        assert len(lines) == 4
        assert lines[1].split(",")[3] == "1/2"  # conditional target for color 1


class TestConjectureCommand:
    def test_coloring_table(self, tmp_path):
        code, res = run_json(tmp_path, ["conjecture", "--h", "k3", "--m", "2"])
        assert code == 0
        assert res["coloring_model"] is True
        assert [row["d"] for row in res["rows"]] == [1, 2, 3]
        row = res["rows"][1]
        assert row["exact"] == "18"
        assert row["prefactor_model"] == "6e"
        assert row["f_q"] == "1"
        assert row["consistency_L_vs_f"] is True

    def test_non_coloring_model(self, tmp_path):
        code, res = run_json(
            tmp_path, ["conjecture", "--h", "ind", "--max-d", "2"]
        )
        assert code == 0
        assert res["coloring_model"] is False
        assert "f_q" not in res["rows"][0]
        assert res["rows"][1]["prefactor_model"] == "2*sqrt(e)"

    def test_table_summary(self, capsys):
        assert main(["conjecture", "--h", "k3", "--m", "2"]) == 0
        err = capsys.readouterr().err
        assert "6e" in err and "prediction" in err

    def test_csv_export(self, tmp_path):
        csv_path = tmp_path / "table.csv"
        code, _ = run_json(
            tmp_path,
            ["conjecture", "--h", "k3", "--m", "2", "--csv", str(csv_path)],
        )
        assert code == 0
        lines = csv_path.read_text().strip().splitlines()
        assert len(lines) == 4

    def test_csv_rejected_elsewhere(self, capsys):
        assert main(["count", "--h", "k3", "--csv", "/tmp/x.csv"]) == 2


class TestCorpusCommand:
    def make_golden(self, path, config, result=None):
        path.write_text(
            json.dumps({"config": config, "result": result}, indent=2) + "\n"
        )

    def test_update_then_pass(self, tmp_path, capsys):
        gdir = tmp_path / "golden"
        gdir.mkdir()
        self.make_golden(
            gdir / "count.json",
            {"command": "count", "h": "k3", "m": 2, "d": 2, "method": "both"},
        )
        assert main(["corpus", "--golden-dir", str(gdir)]) == 4
        capsys.readouterr()
        assert main(["corpus", "--golden-dir", str(gdir), "--update"]) == 0
        stored = json.loads((gdir / "count.json").read_text())
        assert stored["result"]["z"] == "18"
        capsys.readouterr()
        assert main(["corpus", "--golden-dir", str(gdir)]) == 0

    def test_tampered_golden_fails(self, tmp_path, capsys):
        gdir = tmp_path / "golden"
        gdir.mkdir()
        self.make_golden(
            gdir / "analyze.json", {"command": "analyze", "h": "wr"}
        )
        assert main(["corpus", "--golden-dir", str(gdir), "--update"]) == 0
        doc = json.loads((gdir / "analyze.json").read_text())
        doc["result"]["eta"] = "5"
        (gdir / "analyze.json").write_text(json.dumps(doc))
        capsys.readouterr()
        code = main(["corpus", "--golden-dir", str(gdir)])
        assert code == 4
        captured = capsys.readouterr()
        assert "failed=1" in captured.err or "failed=1" in captured.out

    def test_thread_env_cap(self, tmp_path, monkeypatch):
        gdir = tmp_path / "golden"
        gdir.mkdir()
        for i in range(3):
            self.make_golden(
                gdir / f"a{i}.json", {"command": "analyze", "h": f"kq:{i + 3}"}
            )
        monkeypatch.setenv("TORUSHOM_THREADS", "2")
        code, res = run_json(
            tmp_path, ["corpus", "--golden-dir", str(gdir), "--update"]
        )
        assert code == 0
        assert res["workers"] == 2

    def test_bad_thread_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("TORUSHOM_THREADS", "0")
        assert main(["corpus", "--golden-dir", str(tmp_path)]) == 2

    def test_empty_dir_is_config_error(self, tmp_path, capsys):
        assert main(["corpus", "--golden-dir", str(tmp_path)]) == 2

    def test_checked_in_corpus_passes(self, capsys):
        assert main(["corpus", "--golden-dir", str(GOLDEN_DIR)]) == 0


class TestDriver:
    def test_unknown_flag_exits_2(self, capsys):
        assert main(["count", "--zzz", "1"]) == 2

    def test_unknown_preset_exits_2(self, capsys):
        assert main(["analyze", "--h", "mystery"]) == 2

    def test_help_exits_0(self, capsys):
        assert main(["--help"]) == 0

    def test_result_identical_across_reruns(self, tmp_path):
        argv = ["influence", "--h", "wr", "--m", "2", "--d", "2",
                "--x", "antipodal", "--l", "1"]
        _, first = run_json(tmp_path, argv)
        _, second = run_json(tmp_path, argv)
        assert result_bytes(first) == result_bytes(second)

    def test_meta_separated_from_result(self, tmp_path):
        out = tmp_path / "doc.json"
        assert main(["analyze", "--h", "k3", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert set(doc) == {"result", "meta"}
        assert set(doc["meta"]) == {"timestamp", "runtime_ms", "config"}
