import io
import json
import math
from fractions import Fraction

import pandas as pd
import pytest
from click.testing import CliRunner

from src import __version__
from src.asymptotics.sandwich import sandwich_check
from src.cli import main as cli_main
from src.cli.main import cli
from src.cli.reports import ReportWriter, to_jsonable


@pytest.fixture
def runner():
    return CliRunner()


def test_gen_champernowne(runner):
    result = runner.invoke(cli, ["gen", "--system", "base10", "--n", "190"])
    assert result.exit_code == 0
    expected = "".join(str(i) for i in range(10)) + "".join(f"{i:02d}" for i in range(90))
    assert len(result.stdout.strip()) == 190
    assert result.stdout.strip() == expected
    assert "# command: gen" in result.stderr


def test_gen_boundaries_file(runner, tmp_path):
    index = tmp_path / "bounds.csv"
    result = runner.invoke(cli, ["gen", "--system", "gls3", "--n", "6", "--boundaries", str(index)])
    assert result.exit_code == 0
    assert result.stdout.strip() == "012000"

    df = pd.read_csv(index, comment="#")
    assert list(df["offset"]) == [0, 1, 2, 3, 5]
    assert list(df["measure"]) == ["1/2", "1/4", "1/4", "1/4", "1/8"]


def test_gen_budget_is_usage_error(runner):
    result = runner.invoke(cli, ["gen", "--n", "1000", "--budget", "10"])
    assert result.exit_code == 2
    assert "digit budget" in result.output


def test_bad_system_prints_schema(runner):
    result = runner.invoke(cli, ["sums", "--system", "1/2,1/3", "--eps", "1/4"])
    assert result.exit_code == 2
    assert "sum to exactly 1" in result.output
    assert '"digits"' in result.output


def test_sums_json(runner):
    result = runner.invoke(cli, ["sums", "--system", "base2", "--eps", "1/4", "--format", "json"])
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["metadata"]["command"] == "sums"
    assert report["metadata"]["system_measures"] == ["1/2", "1/2"]
    row = report["rows"][0]
    assert (row["S"], row["S_sharp"]) == (10, 7)


def test_sums_for_string(runner):
    result = runner.invoke(cli, ["sums", "--system", "base2", "--eps", "1/4", "--string", "0",
                                 "--format", "json"])
    assert result.exit_code == 0
    assert json.loads(result.stdout)["rows"][0]["S_s"] == 5


def test_sums_csv_is_byte_identical(runner):
    args = ["sums", "--system", "gls3", "--eps-range", "2^-4..2^-12", "--format", "csv"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)
    assert first.exit_code == 0
    assert first.stdout == second.stdout
    lines = first.stdout.splitlines()
    assert lines[0] == "# command: sums"
    header = next(line for line in lines if not line.startswith("#"))
    assert header.startswith("eps,eps_float,S,S_sharp")


def test_stats_json(runner):
    result = runner.invoke(cli, ["stats", "--system", "base10", "--N", "10", "--K", "1", "--format", "json"])
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["metadata"]["max_ratio"] == 1.0
    assert len(report["rows"]) == 10


def test_stats_row_cap(runner):
    result = runner.invoke(cli, ["stats", "--system", "base10", "--N", "1000", "--K", "4"])
    assert result.exit_code == 2
    assert "row cap" in result.output


def test_stats_table(runner, tmp_path):
    out = tmp_path / "table.csv"
    result = runner.invoke(cli, ["stats", "--system", "gls3", "--K", "2", "--table", "100,1000",
                                 "--output", str(out)])
    assert result.exit_code == 0
    df = pd.read_csv(out, comment="#")
    assert list(df["census_total"]) == [99, 999]


def test_laplace_hessian_base2(runner):
    result = runner.invoke(cli, ["laplace", "--system", "base2", "--eps", "1/4", "--check", "hessian"])
    assert result.exit_code == 0
    row = json.loads(result.stdout)["rows"][0]
    assert row["hessian_A"][0][0] == pytest.approx(4 * math.log(2), abs=1e-9)
    assert row["eigenvalues"][0] > 0


def test_laplace_gauss_csv(runner):
    result = runner.invoke(cli, ["laplace", "--check", "gauss", "--format", "csv"])
    assert result.exit_code == 0
    assert result.stdout.startswith("# command: laplace\n")
    df = pd.read_csv(io.StringIO(result.stdout), comment="#")
    assert (df["rel_error"] < 1e-2).all()


def test_laplace_estimate(runner):
    result = runner.invoke(cli, ["laplace", "--system", "base2", "--eps", "2^-20", "--check", "estimate"])
    assert result.exit_code == 0
    row = json.loads(result.stdout)["rows"][0]
    assert row["H_sharp_eps_limit"] == pytest.approx(1)
    assert row["H_sharp_eps"] == pytest.approx(1, rel=1e-9)


def test_verify_failure_exit_code(runner, monkeypatch):
    failing = pd.DataFrame([
        {"check": "ok_check", "passed": True, "observed": 1, "expected": 1, "detail": ""},
        {"check": "broken_check", "passed": False, "observed": 2, "expected": 1, "detail": ""},
    ])
    monkeypatch.setattr(cli_main, "run_battery", lambda *args, **kwargs: failing)
    result = runner.invoke(cli, ["verify", "--system", "base2"])
    assert result.exit_code == 1
    assert "FAIL  broken_check" in result.stdout
    assert "broken_check" in result.stderr


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


@pytest.mark.slow
def test_verify_gls3_quick(runner):
    result = runner.invoke(cli, ["verify", "--system", "gls3", "--quick"])
    assert result.exit_code == 0, result.output
    assert "FAIL" not in result.stdout


def test_to_jsonable_non_finite():
    assert to_jsonable(float("nan")) is None
    assert to_jsonable(float("inf")) is None
    assert to_jsonable([1.5, float("-inf")]) == [1.5, None]


def test_json_report_skipped_rows_are_valid_json(base2):
    df = sandwich_check(base2, [Fraction(1, 2), Fraction(1, 8)])
    buf = io.StringIO()
    with ReportWriter(buf, "json", {"note": float("inf")}) as writer:
        writer.write_frame(df)

    def reject(token):
        raise ValueError(f"non-standard JSON token {token}")

    report = json.loads(buf.getvalue(), parse_constant=reject)
    skipped, kept = report["rows"]
    assert skipped["skipped"]
    assert skipped["S_over_H_lower"] is None
    assert kept["S_over_H_lower"] > 0
    assert report["metadata"]["note"] is None
