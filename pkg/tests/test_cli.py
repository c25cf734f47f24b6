import json
import math

import pytest
from scipy import stats

from fraccount import cli, pmf_table, make_spec
from fraccount.verify import CheckResult


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestPmfCommand:
    def test_poisson_rows(self, capsys):
        code, out, _ = run_cli(
            capsys, "pmf", "--mu", "1", "--beta", "0", "--rate", "1",
            "--time", "1", "--nmax", "5",
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "n,probability"
        assert lines[-1].startswith("tail_mass,")
        ref = stats.poisson(1.0)
        for row in lines[1:-1]:
            n, p = row.split(",")
            assert abs(float(p) - ref.pmf(int(n))) < 1e-10

    def test_fractional_zero_row(self, capsys):
        code, out, _ = run_cli(
            capsys, "pmf", "--mu", "0.5", "--beta", "0", "--rate", "1",
            "--time", "1", "--nmax", "20",
        )
        assert code == 0
        first = out.strip().split("\n")[1]
        from fraccount import mittag_leffler

        assert abs(float(first.split(",")[1]) - mittag_leffler(0.5, -1.0)) < 1e-11

    def test_constraint_exit_code(self, capsys):
        code, _, err = run_cli(
            capsys, "pmf", "--mu", "1", "--beta", "0.5", "--rate", "1", "--time", "1",
        )
        assert code == 2
        assert "beta must satisfy -mu < beta <= 1-mu" in err

    def test_numeric_exit_code(self, capsys):
        code, _, err = run_cli(
            capsys, "pmf", "--mu", "0.5", "--beta", "0", "--rate", "1",
            "--time", "1e9",
        )
        assert code == 3
        assert "series domain" in err

    def test_csv_roundtrip_17_digits(self, capsys):
        code, out, _ = run_cli(
            capsys, "pmf", "--mu", "0.7", "--beta", "0.1", "--rate", "1",
            "--time", "1", "--nmax", "10",
        )
        assert code == 0
        table = pmf_table(make_spec(0.7, 0.1, 1.0), 1.0, 10)
        rows = out.strip().split("\n")[1:-1]
        for row, want in zip(rows, table.probs):
            assert float(row.split(",")[1]) == want


class TestJsonOutput:
    def test_envelope_and_roundtrip(self, capsys):
        args = (
            "pmf", "--mu", "0.5", "--beta", "0.25", "--rate", "1",
            "--time", "1", "--nmax", "8", "--format", "json",
        )
        code, out1, _ = run_cli(capsys, *args)
        assert code == 0
        code, out2, _ = run_cli(capsys, *args)
        assert out1 == out2
        doc = json.loads(out1)
        assert set(doc) == {"params", "inputs", "values", "meta"}
        assert doc["params"]["mu"] == 0.5
        assert "tolerances" in doc["meta"] and "seed" in doc["meta"]
        table = pmf_table(make_spec(0.5, 0.25, 1.0), 1.0, 8)
        for row, want in zip(doc["values"]["rows"], table.probs):
            assert row[1] == want
        assert doc["values"]["tail_mass"] == table.tail_mass


class TestMomentsCommand:
    def test_poisson_values(self, capsys):
        code, out, _ = run_cli(
            capsys, "moments", "--mu", "1", "--beta", "0", "--rate", "1",
            "--time", "4",
        )
        assert code == 0
        header, row = out.strip().split("\n")
        cols = dict(zip(header.split(","), (float(v) for v in row.split(","))))
        assert abs(cols["mean"] - 4.0) < 1e-10
        assert abs(cols["variance"] - 4.0) < 1e-10
        assert abs(cols["skewness"] - 0.5) < 1e-10
        assert abs(cols["kurtosis_excess"] - 0.25) < 1e-10

    def test_time_grid(self, capsys):
        code, out, _ = run_cli(
            capsys, "moments", "--mu", "0.5", "--beta", "0", "--rate", "1",
            "--time-start", "0.5", "--time-stop", "2.0", "--time-steps", "4",
        )
        assert code == 0
        assert len(out.strip().split("\n")) == 5

    def test_missing_time(self, capsys):
        code, _, err = run_cli(
            capsys, "moments", "--mu", "0.5", "--beta", "0", "--rate", "1"
        )
        assert code == 2


class TestStirlingCommand:
    def test_second_kind_triangle(self, capsys):
        code, out, _ = run_cli(capsys, "stirling", "--kind", "second", "--max", "5")
        assert code == 0
        values = {}
        for line in out.strip().split("\n")[1:]:
            m, l, v = line.split(",")
            values[(int(m), int(l))] = int(v)
        assert values[(4, 2)] == 7
        assert values[(5, 5)] == 1

    def test_frac_reduces_to_integer_triangle(self, capsys):
        code, out, _ = run_cli(
            capsys, "stirling", "--kind", "frac", "--mu", "1", "--beta", "0",
            "--max", "5",
        )
        assert code == 0
        for line in out.strip().split("\n")[1:]:
            m, l, v = line.split(",")
            from fraccount import stirling2

            assert abs(float(v) - stirling2(int(m), int(l))) < 1e-10

    def test_frac_needs_params(self, capsys):
        code, _, err = run_cli(capsys, "stirling", "--kind", "frac", "--max", "4")
        assert code == 2


class TestBellCommand:
    def test_bell_numbers(self, capsys):
        code, out, _ = run_cli(capsys, "bell", "--mu", "1", "--beta", "0", "--max", "5")
        assert code == 0
        vals = [float(line.split(",")[1]) for line in out.strip().split("\n")[1:]]
        assert vals == pytest.approx([1, 1, 2, 5, 15, 52], rel=1e-11)


class TestInterarrivalCommand:
    def test_density_grid(self, capsys):
        code, out, _ = run_cli(
            capsys, "interarrival", "--mu", "1", "--beta", "0", "--rate", "2",
            "--tau", "1",
        )
        assert code == 0
        row = out.strip().split("\n")[1].split(",")
        assert abs(float(row[1]) - 2.0 * math.exp(-2.0)) < 1e-10
        assert abs(float(row[2]) - math.exp(-2.0)) < 1e-10

    def test_laplace_row(self, capsys):
        code, out, _ = run_cli(
            capsys, "interarrival", "--mu", "0.5", "--beta", "0", "--rate", "1",
            "--u", "4",
        )
        assert code == 0
        row = out.strip().split("\n")[1].split(",")
        assert abs(float(row[1]) - 1.0 / 3.0) < 1e-9
        assert abs(float(row[4]) - 1.0 / 3.0) < 1e-7


class TestSimulateCommand:
    def test_deterministic_output(self, capsys):
        args = (
            "simulate", "--what", "counts", "--mu", "1", "--beta", "0",
            "--rate", "1", "--time", "1", "--samples", "20000", "--seed", "42",
        )
        code, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert code == code2 == 0
        assert out1 == out2
        header, row = out1.strip().split("\n")
        cols = dict(zip(header.split(","), (float(v) for v in row.split(","))))
        assert abs(cols["mean"] - 1.0) < 4.5 * cols["se_mean"]

    def test_seed_changes_stream(self, capsys):
        base = (
            "simulate", "--what", "counts", "--mu", "1", "--beta", "0",
            "--rate", "1", "--time", "1", "--samples", "1000",
        )
        _, out1, _ = run_cli(capsys, *base, "--seed", "1")
        _, out2, _ = run_cli(capsys, *base, "--seed", "2")
        assert out1 != out2

    def test_compound_jump_parsing(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--what", "compound", "--mu", "1", "--beta", "0",
            "--rate", "1", "--time", "2", "--samples", "20000", "--seed", "3",
            "--jump", "degenerate:3",
        )
        assert code == 0
        header, row = out.strip().split("\n")
        cols = dict(zip(header.split(","), (float(v) for v in row.split(","))))
        assert abs(cols["mean"] - 6.0) < 5.0 * cols["se_mean"]

    def test_bad_jump(self, capsys):
        code, _, err = run_cli(
            capsys, "simulate", "--what", "compound", "--mu", "1", "--beta", "0",
            "--rate", "1", "--jump", "cauchy:1",
        )
        assert code == 2

    def test_raw_output(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--what", "counts", "--mu", "1", "--beta", "0",
            "--rate", "1", "--time", "1", "--samples", "50", "--seed", "4", "--raw",
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "sample"
        assert len(lines) == 51

    def test_path_unsupported_regime(self, capsys):
        code, _, err = run_cli(
            capsys, "simulate", "--what", "path", "--mu", "0.7", "--beta", "0.1",
            "--rate", "1", "--time", "1", "--samples", "10", "--seed", "1",
        )
        assert code == 2


class TestOutputFile:
    def test_output_path_and_env_dir(self, capsys, tmp_path, monkeypatch):
        target = tmp_path / "out.csv"
        code, out, _ = run_cli(
            capsys, "pmf", "--mu", "1", "--beta", "0", "--rate", "1",
            "--time", "1", "--nmax", "3", "--output", str(target),
        )
        assert code == 0
        assert out == ""
        text = target.read_text()
        assert text.startswith("n,probability\n")
        assert text.endswith("\n")
        monkeypatch.setenv("FRACCOUNT_OUTPUT_DIR", str(tmp_path))
        code, _, _ = run_cli(
            capsys, "pmf", "--mu", "1", "--beta", "0", "--rate", "1",
            "--time", "1", "--nmax", "3", "--output", "bare.csv",
        )
        assert code == 0
        assert (tmp_path / "bare.csv").read_text() == text


class TestVerifyCommand:
    def test_exit_zero_on_pass(self, capsys, monkeypatch):
        fake = [CheckResult("1 fake", True, "ok", 0.01)]
        monkeypatch.setattr(cli.verify, "run_acceptance", lambda **kw: fake)
        code, out, _ = run_cli(capsys, "verify", "--fast")
        assert code == 0
        assert "PASS" in out

    def test_exit_one_on_fail(self, capsys, monkeypatch):
        fake = [
            CheckResult("1 fake", True, "ok", 0.01),
            CheckResult("2 broken", False, "bad", 0.01),
        ]
        monkeypatch.setattr(cli.verify, "run_acceptance", lambda **kw: fake)
        code, out, _ = run_cli(capsys, "verify")
        assert code == 1
        assert "FAIL" in out
