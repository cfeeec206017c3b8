import json
import math
import time

import numpy as np
import pytest

import qteam.quantum
from qteam.cli import CSV_HEADER, SweepRow, main
from qteam import ValidationError


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "instance.json"
    path.write_text(json.dumps({
        "class": "cac",
        "M": [[1, 0], [0, 1]],
        "N": [[0, 1], [1, 0]],
        "prior": {"type": "iid-lambda", "lambda": 0.8},
        "chi": 2.0,
    }))
    return str(path)


@pytest.fixture
def asym_instance_file(tmp_path):
    prior = [0.3, 0.1, 0.05, 0.05, 0.2, 0.1, 0.1, 0.1]
    path = tmp_path / "asym.json"
    path.write_text(json.dumps({
        "class": "cac",
        "M": [[1, 0], [0, 1]],
        "N": [[0, 1], [1, 0]],
        "prior": {"type": "table", "values": prior},
        "chi": 2.0,
    }))
    return str(path)


@pytest.fixture
def strategy_file(tmp_path):
    path = tmp_path / "strategy.json"
    path.write_text(json.dumps({
        "alpha": math.pi / 2,
        "theta": [0.0, math.pi, 0.0, 0.0],
        "phi": [0.0, math.pi, 0.0, 0.0],
        "assignment": [0, 1, 0, 1, 0, 1, 0, 1],
    }))
    return str(path)


class TestEvaluate:
    def test_prints_cost_table_and_residual(self, capsys, instance_file,
                                            strategy_file):
        assert main(["evaluate", instance_file, strategy_file]) == 0
        out = capsys.readouterr().out
        assert out.startswith("cost=")
        assert "xi=(1,1):" in out
        residual = float(out.strip().splitlines()[-1].split("=")[1])
        assert residual < 1e-12

    def test_json_output(self, capsys, instance_file, strategy_file):
        assert main(["evaluate", "--json", instance_file, strategy_file]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["ns_residual"] < 1e-12
        assert np.asarray(doc["occupation"]).shape == (2, 2, 2, 2)

    def test_malformed_json_exits_2(self, tmp_path, capsys, strategy_file):
        bad = tmp_path / "bad.json"
        bad.write_text('{"class": "cac", ')
        assert main(["evaluate", str(bad), strategy_file]) == 2
        assert "error" in capsys.readouterr().err

    def test_missing_file_exits_4(self, tmp_path, strategy_file, capsys):
        missing = str(tmp_path / "nope.json")
        assert main(["evaluate", missing, strategy_file]) == 4
        capsys.readouterr()

    def test_product_strategy_hits_deterministic_cost(self, capsys, tmp_path,
                                                      instance_file):
        strat = tmp_path / "product.json"
        strat.write_text(json.dumps({
            "alpha": 0.0, "theta": [0.0] * 4, "phi": [0.0] * 4,
            "assignment": [0, 1, 0, 1, 0, 1, 0, 1]}))
        assert main(["evaluate", instance_file, str(strat)]) == 0
        cost = float(capsys.readouterr().out.splitlines()[0].split("=")[1])
        # constant (0, 0) play: the matched-actions deterministic vertex
        assert cost == pytest.approx(-0.5, abs=1e-12)


class TestSimpleCommands:
    def test_classical(self, capsys, instance_file):
        assert main(["classical", instance_file]) == 0
        out = capsys.readouterr().out
        assert "classical_optimum=-1.2" in out
        assert "policy_bits=0100" in out

    def test_nosignalling(self, capsys, instance_file):
        assert main(["nosignalling", instance_file]) == 0
        out = capsys.readouterr().out
        assert "ns_optimum=-1.28" in out
        assert "family=cac" in out

    def test_quantum_restricted_auto(self, capsys, instance_file):
        assert main(["quantum", instance_file]) == 0
        out = capsys.readouterr().out
        assert "mode=restricted" in out
        assert "advantage=true" in out

    def test_quantum_restricted_rejects_asym(self, capsys, asym_instance_file):
        assert main(["quantum", asym_instance_file,
                     "--mode", "restricted"]) == 3
        capsys.readouterr()


class TestThresholds:
    def test_lambda_08(self, capsys):
        assert main(["thresholds", "--lambda", "0.8"]) == 0
        out = capsys.readouterr().out
        assert "chi_th=0.157671" in out
        assert "chi_up_th=6.342329" in out
        assert "chi_lower_ns=0.062500" in out
        assert "chi_upper_ns=16.000000" in out
        assert "A=3.250000" in out

    def test_json_full_precision(self, capsys):
        assert main(["thresholds", "--lambda", "0.8", "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["chi_th"] == pytest.approx(3.25 - math.sqrt(9.5625),
                                              abs=1e-12)

    def test_instance_input(self, capsys, instance_file):
        assert main(["thresholds", instance_file]) == 0
        assert "chi_th=0.157671" in capsys.readouterr().out

    def test_non_sym_prior_exits_3(self, capsys, asym_instance_file):
        assert main(["thresholds", asym_instance_file]) == 3
        err = capsys.readouterr().err
        assert "nosignalling" in err

    def test_no_input_exits_2(self, capsys):
        assert main(["thresholds"]) == 2
        capsys.readouterr()

    def test_bad_lambda_exits_2(self, capsys):
        assert main(["thresholds", "--lambda", "0.4"]) == 2
        capsys.readouterr()


class TestSweep:
    def test_csv_contract(self, capsys, tmp_path, instance_file):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        argv = ["sweep", instance_file, "--chi-from", "0.05", "--chi-to", "20",
                "--steps", "64", "--scale", "log"]
        assert main(argv + ["--out", str(out_a)]) == 0
        assert main(argv + ["--out", str(out_b)]) == 0
        capsys.readouterr()
        data_a = out_a.read_bytes()
        assert data_a == out_b.read_bytes()  # byte-identical reruns
        lines = data_a.decode().split("\n")
        assert lines[0] == CSV_HEADER
        assert lines[-1] == ""
        rows = [line.split(",") for line in lines[1:-1]]
        assert len(rows) == 64
        chis = [float(r[0]) for r in rows]
        assert chis == sorted(chis)
        chi_th = 3.25 - math.sqrt(9.5625)
        chi_up = 3.25 + math.sqrt(9.5625)
        for r in rows:
            chi, j_cl, j_ns, j_q, gap_q, gap_ns = (float(v) for v in r[:6])
            assert r[6] in ("true", "false") and r[7] in ("true", "false")
            assert gap_q == j_q - j_cl
            assert gap_q <= 1e-9 and gap_ns <= 1e-9
            flagged = r[6] == "true"
            in_interval = chi_th < chi < chi_up
            if flagged:
                assert in_interval and gap_q < -1e-6
            else:
                assert (not in_interval) or gap_q >= -1e-6
            if flagged:
                assert r[7] == "true"  # quantum advantage implies ns advantage

    def test_flagged_set_matches_interval(self, tmp_path, capsys, instance_file):
        out = tmp_path / "c.csv"
        assert main(["sweep", instance_file, "--chi-from", "0.05",
                     "--chi-to", "20", "--steps", "64", "--out", str(out)]) == 0
        capsys.readouterr()
        chi_th = 3.25 - math.sqrt(9.5625)
        chi_up = 3.25 + math.sqrt(9.5625)
        for line in out.read_text().splitlines()[1:]:
            cells = line.split(",")
            chi, gap_q = float(cells[0]), float(cells[4])
            expected = chi_th < chi < chi_up and abs(gap_q) >= 1e-6
            assert (cells[6] == "true") == expected

    def test_endpoints_outside_interval_no_flags(self, tmp_path, capsys,
                                                 instance_file):
        out = tmp_path / "d.csv"
        assert main(["sweep", instance_file, "--chi-from", "0.05",
                     "--chi-to", "20", "--steps", "2", "--out", str(out)]) == 0
        capsys.readouterr()
        for line in out.read_text().splitlines()[1:]:
            assert line.endswith("false,false")

    def test_unwritable_path_exits_4(self, capsys, instance_file, tmp_path):
        target = tmp_path / "no-such-dir" / "x.csv"
        assert main(["sweep", instance_file, "--chi-from", "0.5",
                     "--chi-to", "2", "--steps", "2",
                     "--out", str(target)]) == 4
        capsys.readouterr()

    def test_bad_grid_exits_2(self, capsys, instance_file, tmp_path):
        out = str(tmp_path / "x.csv")
        assert main(["sweep", instance_file, "--chi-from", "0",
                     "--chi-to", "2", "--steps", "4", "--out", out]) == 2
        assert main(["sweep", instance_file, "--chi-from", "0.5",
                     "--chi-to", "2", "--steps", "1", "--out", out]) == 2
        capsys.readouterr()


class TestSweepRow:
    def test_gap_invariant_enforced(self):
        with pytest.raises(ValidationError):
            SweepRow(chi=1.0, j_classical=-1.0, j_ns=-1.0, j_quantum=-0.5,
                     gap_quantum=0.5, gap_ns=0.0,
                     quantum_advantage=False, ns_advantage=False)


class TestVerify:
    def test_fast_level_passes_under_a_minute(self, capsys):
        started = time.perf_counter()
        assert main(["verify", "--level", "fast"]) == 0
        elapsed = time.perf_counter() - started
        out = capsys.readouterr().out
        assert elapsed < 60.0
        assert out.count("PASS") == 8
        assert "FAIL" not in out

    def test_corrupted_table_constant_detected(self, capsys, monkeypatch):
        monkeypatch.setattr(qteam.quantum, "BETA_PREFACTOR", 0.26)
        assert main(["verify", "--level", "fast"]) == 1
        captured = capsys.readouterr()
        assert "table_trace_agreement" in captured.err
        assert "FAIL table_trace_agreement" in captured.out
