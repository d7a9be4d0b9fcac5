"""Tests for report serialization and the command-line entry point."""

import json
import subprocess
import sys

import numpy as np
import pytest

from ssflab.cli import main
from ssflab.reports import (
    CheckRecord,
    ExperimentReport,
    check_flag,
    check_ge,
    check_gt,
    check_info,
    check_le,
    merge_reports,
)

# ---------------------------------------------------------------------------
# records


class TestCheckRecord:
    def test_comparisons(self):
        assert check_le("a", 1.0, 1.0).passed
        assert not check_le("a", 1.1, 1.0).passed
        assert check_ge("a", 1.0, 1.0).passed
        assert not check_ge("a", 0.9, 1.0).passed
        assert check_gt("a", 1.1, 1.0).passed
        assert not check_gt("a", 1.0, 1.0).passed
        assert check_flag("a", True).passed
        assert check_flag("a", False, expected=False).passed
        assert not check_flag("a", True, expected=False).passed
        assert check_info("a", 42.0).passed

    def test_validation(self):
        with pytest.raises(ValueError, match="non-empty"):
            CheckRecord("", 1.0, 1.0, "<=", True)
        with pytest.raises(ValueError, match="op"):
            CheckRecord("a", 1.0, 1.0, "<", True)
        with pytest.raises(ValueError, match="threshold"):
            CheckRecord("a", 1.0, None, "<=", True)

    def test_note_only_when_nonempty(self):
        assert "note" not in check_le("a", 0.0, 1.0).to_json()
        assert check_le("a", 0.0, 1.0, note="why").to_json()["note"] == "why"


class TestExperimentReport:
    def _report(self, **kw):
        records = kw.pop(
            "records",
            (check_le("b", 0.0, 1.0), check_le("a", 0.0, 1.0)),
        )
        return ExperimentReport(
            subcommand=kw.pop("subcommand", "demo"),
            seed=kw.pop("seed", 0),
            config=kw.pop("config", {"x": 1}),
            records=records,
            **kw,
        )

    def test_records_sorted_and_aggregate(self):
        rep = self._report()
        assert [r.name for r in rep.records] == ["a", "b"]
        assert rep.aggregate_pass
        failing = self._report(records=(check_le("a", 2.0, 1.0),))
        assert not failing.aggregate_pass

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            self._report(records=(check_le("a", 0.0, 1.0), check_ge("a", 0.0, 0.0)))

    def test_timings_not_serialized(self):
        rep = self._report(timings={"total_s": 1.23})
        assert "timings" not in rep.to_json()
        assert "1.23" in rep.summary_text()

    def test_json_text_deterministic(self):
        a = self._report(timings={"total_s": 1.0}).json_text()
        b = self._report(timings={"total_s": 999.0}).json_text()
        assert a == b
        assert a.endswith("\n")
        json.loads(a)

    def test_json_rejects_nan(self):
        rep = self._report(records=(check_info("a", float(np.nan)),))
        with pytest.raises(ValueError):
            rep.json_text()

    def test_csv_records_mode(self):
        text = self._report().csv_text()
        lines = text.strip().split("\n")
        assert lines[0] == "# schema_version=1"
        assert lines[1] == "name,value,threshold,op,passed"
        assert len(lines) == 4

    def test_csv_single_table_mode(self):
        rows = [{"x": 1.0, "flag": True}, {"x": 2.5, "flag": False}]
        rep = self._report(tables={"sweep": rows})
        lines = rep.csv_text().strip().split("\n")
        assert lines[1] == "x,flag"
        assert lines[2] == "1.0,1"
        assert lines[3] == "2.5,0"

    def test_summary_lines(self):
        text = self._report().summary_text()
        assert text.count("PASS") == 3  # two records plus the verdict
        assert "demo: 2/2 checks" in text

    def test_merge_prefixes(self):
        part = self._report(tables={"t": [{"x": 1}]})
        merged = merge_reports("all", 7, {"left": part, "right": part})
        names = [r.name for r in merged.records]
        assert "left.a" in names and "right.b" in names
        assert set(merged.tables) == {"left.t", "right.t"}
        assert merged.config == {"left": {"x": 1}, "right": {"x": 1}}
        assert merged.seed == 7
        assert merged.aggregate_pass


# ---------------------------------------------------------------------------
# command line


def _write_config(tmp_path, payload, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


TINY_TRACE = {
    "seed": 3,
    "trace-check": {"trials": 3, "dims": [2, 3], "det_trials": 1, "det_points": 2},
}

TINY_DOI = {
    "doi-check": {
        "dim": 8,
        "trials": 4,
        "split_trials": 2,
        "mz_list": [{"m": 3, "z": [0.0, 2.0]}],
    }
}


class TestCliRuns:
    def test_passing_run_writes_json(self, tmp_path, capsys):
        cfg = _write_config(tmp_path, TINY_TRACE)
        out = tmp_path / "report.json"
        rc = main(["trace-check", "--config", cfg, "--out", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["aggregate_pass"] is True
        assert payload["subcommand"] == "trace-check"
        assert payload["seed"] == 3
        err = capsys.readouterr().err
        assert "PASS trace-check" in err

    def test_payload_to_stdout_without_out(self, tmp_path, capsys):
        cfg = _write_config(tmp_path, TINY_TRACE)
        rc = main(["trace-check", "--config", cfg])
        assert rc == 0
        captured = capsys.readouterr()
        payload = json.loads(captured.out)
        assert payload["aggregate_pass"] is True
        assert "checks" in captured.err

    def test_seed_flag_wins_over_config(self, tmp_path, capsys):
        cfg = _write_config(tmp_path, TINY_TRACE)
        rc = main(["trace-check", "--config", cfg, "--seed", "5"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["seed"] == 5

    def test_csv_format(self, tmp_path, capsys):
        cfg = _write_config(tmp_path, TINY_TRACE)
        rc = main(["trace-check", "--config", cfg, "--format", "csv"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.startswith("# schema_version=1\n")
        assert "name,value,threshold,op,passed" in out

    def test_failing_suite_returns_one(self, tmp_path, capsys):
        # a near-real shift puts cofactor zeros inside the square, so the
        # bounded certificate cannot pass
        cfg = _write_config(
            tmp_path,
            {"rm-cert": {"grid_n": 101, "bounded_certs": [[3, 1.0, 0.01]]}},
        )
        rc = main(["rm-cert", "--config", cfg])
        assert rc == 1
        captured = capsys.readouterr()
        assert json.loads(captured.out)["aggregate_pass"] is False
        assert "FAIL" in captured.err

    def test_jobs_do_not_change_payload(self, tmp_path):
        cfg = _write_config(tmp_path, TINY_DOI)
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        assert main(["doi-check", "--config", cfg, "--seed", "7", "--jobs", "1", "--out", str(out1)]) == 0
        assert main(["doi-check", "--config", cfg, "--seed", "7", "--jobs", "2", "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_repeat_run_bit_identical(self, tmp_path):
        cfg = _write_config(tmp_path, TINY_TRACE)
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        main(["trace-check", "--config", cfg, "--out", str(out1)])
        main(["trace-check", "--config", cfg, "--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()


class TestCliConfigErrors:
    def test_bad_value_names_field(self, tmp_path, capsys):
        cfg = _write_config(
            tmp_path, {"trace-check": {"dims": [2, -3], "trials": 1}}
        )
        rc = main(["trace-check", "--config", cfg])
        assert rc == 2
        err = capsys.readouterr().err
        assert "config error" in err
        assert "trace-check.dims[1]" in err

    def test_unknown_section(self, tmp_path, capsys):
        cfg = _write_config(tmp_path, {"trace-chek": {}})
        rc = main(["trace-check", "--config", cfg])
        assert rc == 2
        assert "trace-chek" in capsys.readouterr().err

    def test_unknown_key_in_section(self, tmp_path, capsys):
        cfg = _write_config(tmp_path, {"trace-check": {"trails": 5}})
        rc = main(["trace-check", "--config", cfg])
        assert rc == 2
        assert "trace-check.trails" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path, capsys):
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        rc = main(["trace-check", "--config", str(p)])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        rc = main(["trace-check", "--config", str(tmp_path / "absent.json")])
        assert rc == 2

    def test_bad_seed_flag(self, capsys):
        rc = main(["trace-check", "--seed", "-1"])
        assert rc == 2
        assert "seed" in capsys.readouterr().err

    def test_bad_mz_entry(self, tmp_path, capsys):
        cfg = _write_config(
            tmp_path, {"doi-check": {"mz_list": [{"m": 2, "z": [0.0, 1.0]}]}}
        )
        rc = main(["doi-check", "--config", cfg])
        assert rc == 2
        assert "mz_list" in capsys.readouterr().err

    def test_unknown_subcommand_exits(self):
        with pytest.raises(SystemExit):
            main(["not-a-suite"])


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(TINY_TRACE))
    proc = subprocess.run(
        [sys.executable, "-m", "ssflab.cli", "trace-check", "--config", str(cfg)],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    payload = json.loads(proc.stdout)
    assert payload["aggregate_pass"] is True
    assert "PASS" in proc.stderr
