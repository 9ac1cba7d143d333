import json
import math

import pytest
from click.testing import CliRunner

from cli import _emit, cli
from utils.instance_io import InstanceStore, read_record, write_record


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def test_generate_single(runner, tmp_path):
    out = tmp_path / "inst.json"
    result = runner.invoke(
        cli, ["generate", "--n", "10", "--eta", "0.6", "--gamma", "0", "--dfrac", "0.30",
              "--afrac", "0.10", "--seed", "7", "-o", str(out)]
    )
    assert result.exit_code == 0, result.output
    instance = InstanceStore.load(out)
    assert instance.n == 10
    assert instance.D == pytest.approx(0.3 * sum(instance.d), rel=1e-12)


def test_generate_grid(runner, tmp_path):
    result = runner.invoke(cli, ["generate", "--grid", "--n", "10,25", "--seed", "7", "-o", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert len(list(tmp_path.glob("*.json"))) == 48


@pytest.mark.parametrize(
    "args",
    [
        ["generate", "--n", "0", "-o", "x.json"],
        ["generate", "--n", "5,6", "-o", "x.json"],
        ["generate", "--n", "5", "--eta", "0.7", "-o", "x.json"],
    ],
)
def test_generate_rejects_bad_flags(runner, tmp_path, args):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        result = runner.invoke(cli, args)
    assert result.exit_code != 0


def test_grid_rejects_factor_options(runner, tmp_path):
    result = runner.invoke(cli, ["generate", "--grid", "--n", "10", "--eta", "0.8", "--custom", "-o", str(tmp_path)])
    assert result.exit_code == 2
    assert "--eta" in result.output
    assert "--custom" in result.output
    assert not list(tmp_path.glob("*.json"))


def test_generate_custom_mode(runner, tmp_path):
    out = tmp_path / "custom.json"
    result = runner.invoke(cli, ["generate", "--n", "5", "--eta", "0.7", "--custom", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert InstanceStore.load(out).epsilon == 0.875


def test_solve_two_node(runner, data_dir, tmp_path):
    out = tmp_path / "result.json"
    result = runner.invoke(cli, ["solve", str(data_dir / "two_node.json"), "-o", str(out)])
    assert result.exit_code == 0, result.output
    record = read_record(out)
    assert record["phi"] == pytest.approx(0.0, abs=1e-9)
    assert record["exact"] is True
    assert record["status"] == "PROVED_OPTIMAL_NE"
    assert set(record) >= {
        "x", "alpha", "phi", "exact", "defender_payoff", "attacker_payoff", "objective",
        "objective_value", "iterations", "cuts", "phi_ub", "wall_time_s", "status",
    }


def test_solve_missing_file(runner, tmp_path):
    result = runner.invoke(cli, ["solve", str(tmp_path / "missing.json")])
    assert result.exit_code == 1


def test_solve_on_limit_exits_two(runner, data_dir, tmp_path):
    out = tmp_path / "result.json"
    result = runner.invoke(
        cli, ["solve", str(data_dir / "example1.json"), "--time-limit", "1e-9", "-o", str(out)]
    )
    assert result.exit_code == 2, result.output
    assert read_record(out)["status"] == "INCUMBENT_ON_LIMIT"


def test_solve_then_verify(runner, data_dir, tmp_path):
    out = tmp_path / "result.json"
    instance = str(data_dir / "example1.json")
    assert runner.invoke(cli, ["solve", instance, "--objective", "attacker", "-o", str(out)]).exit_code == 0
    result = runner.invoke(cli, ["verify", instance, str(out)])
    assert result.exit_code == 0, result.output
    assert "verified" in result.output


def test_verify_detects_tampering(runner, data_dir, tmp_path):
    out = tmp_path / "result.json"
    instance = str(data_dir / "two_node.json")
    runner.invoke(cli, ["solve", instance, "-o", str(out)])
    record = read_record(out)
    record["defender_payoff"] += 1
    write_record(record, out)
    result = runner.invoke(cli, ["verify", instance, str(out)])
    assert result.exit_code == 1
    assert "defender payoff" in result.output


def test_pos_and_poa(runner, data_dir, tmp_path):
    result = runner.invoke(cli, ["pos", str(data_dir / "two_node.json")])
    assert result.exit_code == 0, result.output
    assert "PoS = 1.83" in result.output

    out = tmp_path / "poa.json"
    result = runner.invoke(cli, ["poa", str(data_dir / "two_node.json"), "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert read_record(out)["value"] == pytest.approx(2.0)


def test_batch_then_report(runner, data_dir, tmp_path):
    instances = tmp_path / "instances"
    instances.mkdir()
    (instances / "two_node.json").write_text((data_dir / "two_node.json").read_text())
    runner.invoke(cli, ["generate", "--n", "4", "--seed", "3", "-o", str(instances / "small.json")])

    results = tmp_path / "results"
    result = runner.invoke(cli, ["batch", str(instances), "-o", str(results), "--time-limit", "30"])
    assert result.exit_code == 0, result.output
    record = read_record(results / "two_node.json")
    assert record["pos"] == pytest.approx(11 / 6)
    assert record["poa"] == pytest.approx(2.0)
    assert record["f_d"] == pytest.approx(6.0)
    assert record["f_a"] == pytest.approx(5.0)

    report = tmp_path / "report.csv"
    result = runner.invoke(cli, ["report", str(results), "--group-by", "n", "-o", str(report)])
    assert result.exit_code == 0, result.output
    assert report.exists()

    result = runner.invoke(cli, ["report", str(results), "--group-by", "params"])
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[0].startswith("kind,name,n")


def test_report_without_records(runner, tmp_path):
    assert runner.invoke(cli, ["report", str(tmp_path)]).exit_code == 1


def test_ingest(runner, data_dir, tmp_path):
    out = tmp_path / "snap.json"
    result = runner.invoke(
        cli,
        ["ingest", str(data_dir / "sample_snapshot.json"), "--eta", "0.8",
         "--defender-adjust", "router=3,2", "-o", str(out)],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["n"] == 9
    assert payload["p_d"][0] == 3 * 410
    assert "edges" in payload


def test_ingest_rejects_malformed_adjustment(runner, data_dir, tmp_path):
    result = runner.invoke(
        cli, ["ingest", str(data_dir / "sample_snapshot.json"), "--defender-adjust", "router", "-o",
              str(tmp_path / "x.json")]
    )
    assert result.exit_code != 0


def test_printed_record_is_strict_json(capsys):
    _emit({"phi": 2.5, "phi_relative": math.inf}, None)
    printed = json.loads(capsys.readouterr().out, parse_constant=lambda name: pytest.fail(f"emitted {name}"))
    assert printed == {"phi": 2.5, "phi_relative": "inf"}
