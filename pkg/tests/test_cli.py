import json
import math

import pytest

from main import main
from utils.export import read_csv_rows


def run(*argv):
    return main([str(a) for a in argv])


def cell(rows, i, j, column):
    header = rows[0]
    row = next(r for r in rows[1:] if r[0] == str(i) and r[1] == str(j))
    return float(row[header.index(column)])


@pytest.fixture
def out(tmp_path):
    return tmp_path / "out"


@pytest.fixture
def single_component_problem(write_problem):
    return write_problem({
        "grid": {"n": 51},
        "field": "real",
        "g": {"delta": 1.0, "smooth": "0"},
        "components": [{"separable": {"a": "2", "b": "1"}}],
        "solver": {"orders": 4, "method": "both"},
    }, "single.json")


class TestSolve:
    def test_constant_problem(self, write_problem, constant_problem_data, out):
        assert run("solve", "--input", write_problem(constant_problem_data), "--out", out) == 0
        rows = read_csv_rows(out / "solution.csv")
        assert cell(rows, 200, 0, "re") == pytest.approx(3 * math.e ** 3, rel=1e-3)
        report = json.loads((out / "report.json").read_text())
        assert report["converged"]
        assert report["reports"][0]["method"] == "resummed"
        assert "timings" not in (out / "report.json").read_text()

    def test_zero_kernel_returns_forcing(self, write_problem, out):
        path = write_problem({
            "grid": {"n": 11},
            "field": "real",
            "g": {"delta": 0.0, "smooth": "tp - t"},
            "components": [{"numeric": {"k": "0"}}],
        })
        assert run("solve", "--input", path, "--out", out) == 0
        rows = read_csv_rows(out / "solution.csv")
        assert cell(rows, 10, 5, "re") == pytest.approx(0.5)
        assert cell(rows, 10, 0, "re") == pytest.approx(1.0)

    def test_both_methods(self, write_problem, constant_problem_data, out):
        data = {**constant_problem_data, "grid": {"n": 101}, "solver": {"orders": 60, "method": "both"}}
        assert run("solve", "--input", write_problem(data), "--out", out, "--format", "json") == 0
        report = json.loads((out / "report.json").read_text())
        assert [r["method"] for r in report["reports"]] == ["resummed", "neumann"]
        assert not (out / "solution.csv").exists()

    def test_not_converged_writes_outputs(self, write_problem, constant_problem_data, out, capsys):
        data = {**constant_problem_data, "solver": {"orders": 2}}
        assert run("solve", "--input", write_problem(data), "--out", out) == 3
        assert (out / "solution.csv").exists()
        assert json.loads((out / "report.json").read_text())["converged"] is False
        assert "❌" in capsys.readouterr().err

    def test_malformed_problem(self, tmp_path, out, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run("solve", "--input", path, "--out", out) == 2
        assert "❌" in capsys.readouterr().err

    def test_missing_parameter_names_path(self, write_problem, constant_problem_data, out, capsys):
        data = {**constant_problem_data, "components": [{"separable": {"a": "w*tp", "b": "1"}}]}
        assert run("solve", "--input", write_problem(data), "--out", out) == 2
        assert "components.0.separable.a" in capsys.readouterr().err

    def test_unknown_format(self, write_problem, constant_problem_data, out, capsys):
        assert run("solve", "--input", write_problem(constant_problem_data), "--out", out, "--format", "xml") == 2
        assert "formats" in capsys.readouterr().err

    def test_stride_must_be_positive(self, write_problem, constant_problem_data, out):
        assert run("solve", "--input", write_problem(constant_problem_data), "--out", out, "--stride", 0) == 2


class TestConvergence:
    def test_speedup_table(self, write_problem, out):
        path = write_problem({
            "grid": {"n": 101},
            "field": "real",
            "g": {"delta": 1.0, "smooth": "0"},
            "components": [{"separable": {"a": "a", "b": "1"}}, {"separable": {"a": "b", "b": "1"}}],
            "solver": {"orders": 7, "method": "both"},
            "params": {"a": 1.0, "b": 0.05},
        })
        assert run("convergence", "--input", path, "--out", out) == 0
        text = (out / "convergence.csv").read_text()
        assert text.startswith("# C_K=")
        rows = read_csv_rows(out / "convergence.csv")
        assert len(rows) == 1 + 7
        for row in rows[1:]:
            assert float(row[2]) <= float(row[1])
        assert "timings" not in (out / "report.json").read_text()

    def test_single_component(self, single_component_problem, out):
        assert run("convergence", "--input", single_component_problem, "--out", out) == 0
        rows = read_csv_rows(out / "convergence.csv")
        assert float(rows[1][2]) == pytest.approx(0.0, abs=1e-12)
        assert all(row[2] == "nan" for row in rows[2:])

    def test_requires_both_methods(self, write_problem, constant_problem_data, out, capsys):
        assert run("convergence", "--input", write_problem(constant_problem_data), "--out", out) == 2
        assert "solver.method" in capsys.readouterr().err
        assert not (out / "convergence.csv").exists()


class TestVerify:
    def test_default_suite_is_reproducible(self, tmp_path):
        assert run("verify", "--n", 101, "--out", tmp_path / "a") == 0
        assert run("verify", "--n", 101, "--out", tmp_path / "b") == 0
        first = (tmp_path / "a" / "verify.json").read_bytes()
        assert first == (tmp_path / "b" / "verify.json").read_bytes()
        assert json.loads(first)["passed"] is True

    def test_coarse_grid_fails_theta_power(self, out):
        assert run("verify", "--n", 21, "--out", out) == 1
        checks = json.loads((out / "verify.json").read_text())["checks"]
        theta = next(c for c in checks if c["name"] == "theta_power")
        assert theta["status"] == "fail"

    def test_problem_input(self, single_component_problem, out):
        assert run("verify", "--input", single_component_problem, "--out", out) == 0
        checks = json.loads((out / "verify.json").read_text())["checks"]
        assert {c["status"] for c in checks if c["name"] == "permutation_invariance"} == {"n/a"}

    def test_csv_only(self, single_component_problem, out):
        assert run("verify", "--input", single_component_problem, "--out", out, "--format", "csv") == 0
        assert not (out / "verify.json").exists()
        rows = read_csv_rows(out / "verify.csv")
        assert rows[0] == ["name", "problem", "status", "measured", "threshold", "slack", "detail"]
        statuses = {row[0]: row[2] for row in rows[1:]}
        assert statuses["alternative_T"] == "n/a"
        assert statuses["truncation_identity"] == "pass"

    def test_bad_grid_size(self, out):
        assert run("verify", "--n", 1, "--out", out) == 2


class TestExample:
    def test_unknown_example(self, out, capsys):
        assert run("example", "bogus", "--out", out) == 2
        assert "bogus" in capsys.readouterr().err

    def test_constant(self, out):
        assert run("example", "constant", "--n", 201, "--out", out) == 0
        rows = read_csv_rows(out / "example_constant.csv")
        assert len(rows) == 1 + 201
        summary = json.loads((out / "summary.json").read_text())
        assert summary["name"] == "constant"

    def test_heun(self, out):
        assert run("example", "heun", "--n", 201, "--rk4-steps", 2000, "--out", out) == 0
        assert (out / "example_heun.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert "relative_deviation" in summary["summary"]


def test_no_subcommand():
    assert main([]) == 2
