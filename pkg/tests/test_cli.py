import csv
import json

import pytest

from peps_parent.cli import main


def run(tmp_path, *args):
    code = main(list(args) + ["--out", str(tmp_path)])
    return code


def report(tmp_path, name):
    return json.loads((tmp_path / f"{name}.json").read_text())


class TestCommands:
    def test_lattice(self, tmp_path):
        assert run(tmp_path, "lattice", "--kind", "square-torus", "--dims", "3x3") == 0
        rep = report(tmp_path, "lattice")
        assert rep["result"]["edges"] == 18 and rep["status"] == "ok"

    def test_ising_peps_then_inject_hexagon(self, tmp_path):
        assert run(tmp_path, "ising-peps", "--kind", "hexagonal-open", "--dims", "2x3", "--beta", "0.66") == 0
        assert (tmp_path / "peps.json").exists()
        assert run(tmp_path, "inject", "--peps", str(tmp_path / "peps.json"), "--hexagon", "0,0") == 0
        assert report(tmp_path, "inject")["result"]["injective"]

    def test_inject_union(self, tmp_path):
        args = ["inject", "--model", "random", "--kind", "square-torus", "--dims", "1x6", "--d", "4",
                "--region", "0,1", "--union-with", "3"]
        assert run(tmp_path, *args) == 0
        assert report(tmp_path, "inject")["result"]["union_injective"]

    def test_tile_parent_ed(self, tmp_path):
        common = ["--model", "random", "--dims", "1x4", "--d", "4"]
        assert run(tmp_path, "tile", *common, "--max-size", "2") == 0
        assert report(tmp_path, "tile")["result"]["success"]
        assert run(tmp_path, "parent", *common) == 0
        assert report(tmp_path, "parent")["result"]["term_count"] == 4
        assert run(tmp_path, "ed", *common) == 0
        assert abs(report(tmp_path, "ed")["result"]["eigenvalues"][0]) < 1e-10

    def test_verify_regrouped_torus(self, tmp_path):
        args = ["verify", "--model", "random", "--dims", "2x2", "--d", "4", "--regions", "0,2;1,3"]
        assert run(tmp_path, *args) == 0
        res = report(tmp_path, "verify")["result"]
        assert res["degeneracy"] == 1 and res["identity"]["equal"]

    def test_verify_crosses(self, tmp_path):
        assert run(tmp_path, "verify", "--dims", "2x2", "--terms", "crosses", "--beta", "0.3") == 0
        assert report(tmp_path, "verify")["result"]["degeneracy"] == 1

    def test_classical_checks(self, tmp_path):
        assert run(tmp_path, "classical-checks", "--dims", "2x2", "--max-region", "3") == 0
        res = report(tmp_path, "classical-checks")["result"]
        assert res["rule_mismatches"] == [] and res["correlation_max_error"] < 1e-10

    def test_gap_scan_csv(self, tmp_path):
        assert run(tmp_path, "gap-scan", "--beta-min", "0.2", "--beta-max", "0.3", "--beta-step", "0.1") == 0
        rows = list(csv.reader((tmp_path / "gap-scan.csv").open()))
        assert rows[0] == ["beta", "margin", "holds"] and len(rows) == 3
        assert len(report(tmp_path, "gap-scan")["result"]["crossings"]) == 1

    def test_qmatrix(self, tmp_path):
        assert run(tmp_path, "qmatrix", "--dims", "2x2", "--beta", "0.2") == 0
        assert report(tmp_path, "qmatrix")["result"]["ordering"]["ordered"]
        assert run(tmp_path, "qmatrix", "--dims", "2x2", "--beta", "0.2", "--parent-beta", "0.5") == 0
        assert not report(tmp_path, "qmatrix")["result"]["ordering"]["ordered"]

    def test_ti_convert(self, tmp_path):
        assert run(tmp_path, "ti-convert", "--dims", "2x2", "--beta", "0.4") == 0
        res = report(tmp_path, "ti-convert")["result"]
        assert res["state_difference"] <= 1e-10 and res["bond_dimension"] == 8
        assert (tmp_path / "ti-peps.json").exists()


class TestExitCodes:
    def test_bad_input(self, tmp_path):
        assert run(tmp_path, "lattice", "--kind", "hexagonal-torus", "--dims", "3x3") == 1
        assert report(tmp_path, "lattice")["status"] == "bad-input"

    def test_argparse_errors(self, tmp_path):
        assert run(tmp_path, "lattice", "--dims", "banana") == 1
        assert main(["no-such-command"]) == 1

    def test_cap_exceeded(self, tmp_path):
        assert run(tmp_path, "ti-convert", "--dims", "2x3", "--cap", "16") == 2
        assert report(tmp_path, "ti-convert")["status"] == "cap-exceeded"

    def test_invariant_violation(self, tmp_path):
        assert run(tmp_path, "verify", "--dims", "2x2", "--max-size", "1") == 3
        assert report(tmp_path, "verify")["status"] == "invariant-violation"

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dims": "2x2", "colour": "red"}))
        assert run(tmp_path, "lattice", "--config", str(cfg)) == 1


class TestReproducibility:
    def test_config_and_flags_agree(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dims": [2, 3], "beta": 0.3}))
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["qmatrix", "--config", str(cfg), "--out", str(a)]) == 0
        assert main(["qmatrix", "--dims", "2x3", "--beta", "0.3", "--out", str(b)]) == 0
        ra, rb = json.loads((a / "qmatrix.json").read_text()), json.loads((b / "qmatrix.json").read_text())
        assert ra["result"] == rb["result"]

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dims": "3x3"}))
        assert run(tmp_path, "lattice", "--config", str(cfg), "--dims", "2x2") == 0
        assert report(tmp_path, "lattice")["result"]["vertices"] == 4

    @pytest.mark.parametrize("argv", [["verify", "--model", "random", "--dims", "1x4", "--seed", "5"],
                                      ["gap-scan", "--beta-min", "0.2", "--beta-max", "0.24"]])
    def test_byte_identical_reports(self, tmp_path, argv):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        for f in a.iterdir():
            assert f.read_bytes() == (b / f.name).read_bytes()
