import csv
import json

import numpy as np
import pytest

from boxhash import __version__
from boxhash.cli import SCHEMA_VERSION, main

TRIO_RECORDS = [
    {"w": 100, "h": 100, "cx": 54.1, "cy": 50, "score": 0.9},
    {"w": 100, "h": 100, "cx": 79.1, "cy": 50, "score": 0.8},
    {"w": 100, "h": 100, "cx": 96.1, "cy": 50, "score": 0.7},
]


@pytest.fixture
def trio_json(tmp_path):
    path = tmp_path / "trio.json"
    path.write_text(json.dumps(TRIO_RECORDS))
    return str(path)


@pytest.fixture
def trio_csv(tmp_path):
    path = tmp_path / "trio.csv"
    lines = ["w,h,cx,cy,score"]
    lines += [f"{r['w']},{r['h']},{r['cx']},{r['cy']},{r['score']}" for r in TRIO_RECORDS]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestVersion:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        assert __version__ in out
        assert f"schema {SCHEMA_VERSION}" in out


class TestBound:
    def test_reference_alpha(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--alpha", "0.73")
        assert code == 0
        assert out.strip().startswith("0.5015")

    def test_zero_bound(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--alpha", "0.25")
        assert code == 0
        assert out.strip() == "0"

    def test_domain_error(self, capsys):
        code, _, err = run_cli(capsys, "bound", "--alpha", "1.5")
        assert code != 0
        assert "alpha" in err


class TestHash:
    def test_trio_codes(self, capsys, trio_json):
        code, out, _ = run_cli(capsys, "hash", "--input", trio_json, "--alpha", "0.73")
        assert code == 0
        assert out.splitlines() == ["15 15 3 3", "15 15 5 3", "15 15 5 3"]

    def test_unit_box(self, capsys, tmp_path):
        path = tmp_path / "unit.json"
        path.write_text(json.dumps([{"w": 1, "h": 1, "cx": 0, "cy": 0, "score": 0.5}]))
        code, out, _ = run_cli(capsys, "hash", "--input", str(path), "--alpha", "0.73")
        assert code == 0
        assert out.strip() == "0 0 0 0"

    def test_malformed_row_reports_index(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("w,h,cx,cy,score\n10,10,0,0,0.5\n10,oops,0,0,0.5\n")
        code, _, err = run_cli(capsys, "hash", "--input", str(path), "--alpha", "0.7")
        assert code != 0
        assert "line 3" in err


class TestSuppress:
    def test_trio_nms(self, capsys, trio_json):
        code, out, _ = run_cli(
            capsys, "suppress", "--input", trio_json, "--algo", "nms", "--threshold", "0.5015"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["kept"] == [0, 2]
        assert payload["schema_version"] == SCHEMA_VERSION
        assert "total" in payload["timings_ms"]

    def test_trio_hnms(self, capsys, trio_json):
        code, out, _ = run_cli(
            capsys, "suppress", "--input", trio_json, "--algo", "hnms", "--alpha", "0.73"
        )
        assert code == 0
        assert json.loads(out)["kept"] == [0, 1]

    def test_csv_input_matches_json_input(self, capsys, trio_json, trio_csv):
        _, out_json, _ = run_cli(
            capsys, "suppress", "--input", trio_json, "--algo", "nms", "--threshold", "0.5015"
        )
        _, out_csv, _ = run_cli(
            capsys, "suppress", "--input", trio_csv, "--algo", "nms", "--threshold", "0.5015"
        )
        assert json.loads(out_json)["kept"] == json.loads(out_csv)["kept"]

    def test_soft_reports_rescored(self, capsys, trio_json):
        code, out, _ = run_cli(capsys, "suppress", "--input", trio_json, "--algo", "soft")
        assert code == 0
        payload = json.loads(out)
        assert len(payload["rescored"]) == 3
        assert payload["rescored"][0] == 0.9

    def test_pipeline_reports_stage_timings(self, capsys, trio_json):
        code, out, _ = run_cli(
            capsys, "suppress", "--input", trio_json, "--algo", "pipeline",
            "--alpha", "0.73", "--threshold", "0.5",
        )
        assert code == 0
        payload = json.loads(out)
        assert {"prefilter", "stage2", "total"} <= set(payload["timings_ms"])

    def test_empty_file(self, capsys, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("[]")
        code, out, _ = run_cli(capsys, "suppress", "--input", str(path), "--algo", "nms")
        assert code == 0
        assert json.loads(out)["kept"] == []

    def test_output_file(self, capsys, trio_json, tmp_path):
        out_path = tmp_path / "result.json"
        code, _, _ = run_cli(
            capsys, "suppress", "--input", trio_json, "--algo", "hnms",
            "--alpha", "0.73", "--output", str(out_path),
        )
        assert code == 0
        assert json.loads(out_path.read_text())["kept"] == [0, 1]

    def test_parse_failure_reports_line(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('[\n{"w": 10, "h": 10, "cx": 0, "cy": 0, "score": 0.5},\n{"w": ]')
        code, _, err = run_cli(capsys, "suppress", "--input", str(path), "--algo", "nms")
        assert code != 0
        assert "line 3" in err

    def test_missing_field_reports_record(self, capsys, tmp_path):
        path = tmp_path / "short.json"
        path.write_text('[{"w": 10, "h": 10, "cx": 0, "cy": 0}]')
        code, _, err = run_cli(capsys, "suppress", "--input", str(path), "--algo", "nms")
        assert code != 0
        assert "record 0" in err

    def test_python_backend_matches_auto(self, capsys, trio_json):
        _, out_auto, _ = run_cli(
            capsys, "suppress", "--input", trio_json, "--algo", "nms", "--threshold", "0.5"
        )
        _, out_py, _ = run_cli(
            capsys, "suppress", "--input", trio_json, "--algo", "nms",
            "--threshold", "0.5", "--backend", "python",
        )
        assert json.loads(out_auto)["kept"] == json.loads(out_py)["kept"]

    def test_threads_env_fallback(self, capsys, trio_json, monkeypatch):
        monkeypatch.setenv("BOXHASH_THREADS", "2")
        code, out, _ = run_cli(
            capsys, "suppress", "--input", trio_json, "--algo", "hnms", "--alpha", "0.73"
        )
        assert code == 0
        assert json.loads(out)["kept"] == [0, 1]

    def test_bad_threads_env_rejected(self, capsys, trio_json, monkeypatch):
        monkeypatch.setenv("BOXHASH_THREADS", "many")
        code, _, err = run_cli(
            capsys, "suppress", "--input", trio_json, "--algo", "hnms", "--alpha", "0.73"
        )
        assert code != 0
        assert "BOXHASH_THREADS" in err


class TestBench:
    def test_two_algorithms_two_rows(self, capsys):
        code, out, _ = run_cli(
            capsys, "bench", "--truths", "10", "--per-truth", "10",
            "--algo", "nms,hnms", "--alpha", "0.7", "--repeat", "3", "--warmup", "0",
        )
        assert code == 0
        rows = list(csv.DictReader(out.splitlines()))
        assert [r["algorithm"] for r in rows] == ["nms", "hnms"]
        assert all(int(r["n_boxes"]) == 100 for r in rows)

    def test_fixed_seed_reproduces_kept_count(self, capsys):
        argv = [
            "bench", "--truths", "10", "--per-truth", "10", "--seed", "42",
            "--algo", "hnms", "--repeat", "3", "--warmup", "0",
        ]
        _, first, _ = run_cli(capsys, *argv)
        _, second, _ = run_cli(capsys, *argv)
        kept = lambda text: [r["kept_count"] for r in csv.DictReader(text.splitlines())]
        assert kept(first) == kept(second)

    def test_spec_file(self, capsys, tmp_path):
        spec = tmp_path / "scene.json"
        spec.write_text(json.dumps({"ground_truth_count": 5, "proposals_per_truth": 8, "seed": 1}))
        code, out, _ = run_cli(
            capsys, "bench", "--spec", str(spec), "--algo", "nms", "--repeat", "3", "--warmup", "0"
        )
        assert code == 0
        rows = list(csv.DictReader(out.splitlines()))
        assert int(rows[0]["n_boxes"]) == 40

    def test_csv_and_json_outputs(self, capsys, tmp_path):
        csv_path = tmp_path / "bench.csv"
        json_path = tmp_path / "bench.json"
        code, _, _ = run_cli(
            capsys, "bench", "--truths", "5", "--per-truth", "5",
            "--algo", "nms", "--repeat", "3", "--warmup", "0",
            "--csv", str(csv_path), "--json", str(json_path),
        )
        assert code == 0
        assert csv_path.exists()
        payload = json.loads(json_path.read_text())
        assert payload["schema_version"] == SCHEMA_VERSION

    def test_missing_scene_arguments(self, capsys):
        code, _, err = run_cli(capsys, "bench", "--algo", "nms")
        assert code != 0
        assert "--truths" in err
