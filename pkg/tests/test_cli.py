import csv
import json

import pytest

from ddcsim.cli import SUMMARY_COLUMNS, main
from ddcsim.workload import load_trace

TOY_VM = "vm_id,cpu_cores,ram_gb,sto_gb,arrival,lifetime\n0,8,16,128,0,10\n"


def error_line(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


class TestGen:
    def test_default_count(self, tmp_path, capsys):
        out = tmp_path / "w.csv"
        assert main(["gen", "--out", str(out)]) == 0
        assert len(load_trace(out)) == 2500

    def test_empty(self, tmp_path):
        out = tmp_path / "w.csv"
        assert main(["gen", "--out", str(out), "--count", "0"]) == 0
        assert out.read_text() == "vm_id,cpu_cores,ram_gb,sto_gb,arrival,lifetime\n"

    def test_same_seed_same_file(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["gen", "--out", str(a), "--count", "50", "--seed", "4"])
        main(["gen", "--out", str(b), "--count", "50", "--seed", "4"])
        assert a.read_bytes() == b.read_bytes()


class TestRun:
    def test_toy_fixture_placement(self, tmp_path, capsys):
        trace = tmp_path / "vm.csv"
        trace.write_text(TOY_VM)
        out = tmp_path / "out"
        assert main(["run", "--preset", "toy-table3", "--workload", str(trace), "--algo", "risa",
                     "--algo", "nulb", "--out", str(out)]) == 0
        rows = {r["algorithm"]: r for r in csv.DictReader((out / "placements_risa.csv").open())}
        # toy ids: CPU ordinal 2 -> box 6, RAM ordinal 2 -> box 8, STO ordinal 2 -> box 10
        assert (rows["risa"]["cpu_box"], rows["risa"]["ram_box"], rows["risa"]["sto_box"]) == \
            ("6", "8", "10")
        nulb = next(csv.DictReader((out / "placements_nulb.csv").open()))
        assert (nulb["cpu_box"], nulb["ram_box"], nulb["sto_box"], nulb["span"]) == \
            ("6", "3", "10", "inter_rack")

    def test_bogus_algorithm(self, capsys):
        assert main(["run", "--algo", "bogus"]) == 2
        err = error_line(capsys)
        assert err["error"] == "usage" and "nulb, nalb, risa, risa-bf" in err["message"]

    def test_unreadable_trace(self, tmp_path, capsys):
        assert main(["run", "--workload", str(tmp_path / "missing.csv"),
                     "--out", str(tmp_path)]) == 1
        assert error_line(capsys)["error"] == "io"

    def test_comparison_is_reproducible(self, tmp_path):
        args = ["run", "--count", "150", "--seed", "2", "--no-timing", "--jobs", "2"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        files = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert len(files) == 9
        for name in files:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        rows = list(csv.DictReader((tmp_path / "a" / "summary.csv").open()))
        assert [r["algorithm"] for r in rows] == ["nulb", "nalb", "risa", "risa-bf"]

    def test_time_unit_scales_energy(self, tmp_path):
        base = ["run", "--count", "40", "--algo", "risa", "--no-timing"]
        main(base + ["--out", str(tmp_path / "a")])
        main(base + ["--out", str(tmp_path / "b"), "--time-unit-seconds", "2"])
        a = json.loads((tmp_path / "a" / "metrics_risa.json").read_text())["energy"]
        b = json.loads((tmp_path / "b" / "metrics_risa.json").read_text())["energy"]
        assert b["transceiver_energy_j"] == pytest.approx(2 * a["transceiver_energy_j"])

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"preset": "toy", "topology": {"racks": 3},
                                   "energy": {"alpha": 0.5}}))
        assert main(["run", "--config", str(cfg), "--count", "20", "--out",
                     str(tmp_path / "o"), "--algo", "nulb"]) == 0

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"topology": {"racks": 0}}))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1
        assert error_line(capsys)["error"] == "ConfigError"


class TestReport:
    @pytest.fixture
    def metrics(self, tmp_path):
        main(["run", "--count", "60", "--no-timing", "--out", str(tmp_path / "m")])
        return sorted((tmp_path / "m").glob("metrics_*.json"))

    def test_one_and_four(self, metrics, tmp_path):
        out = tmp_path / "r.csv"
        assert main(["report", str(metrics[0]), "--out", str(out)]) == 0
        assert len(list(csv.DictReader(out.open()))) == 1
        assert main(["report", *map(str, metrics), "--out", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 4 and list(rows[0]) == list(SUMMARY_COLUMNS)

    def test_schema_mismatch_names_file(self, metrics, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        doc = json.loads(metrics[0].read_text())
        del doc["energy"]
        bad.write_text(json.dumps(doc))
        assert main(["report", str(metrics[0]), str(bad)]) == 1
        err = error_line(capsys)
        assert err["error"] == "SchemaError" and "bad.json" in err["message"]
