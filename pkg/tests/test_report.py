import math

import pandas as pd
import pytest

from utils.instance_io import write_record
from utils.report import REPORT_COLUMNS, BatchReport


def record(name, n=10, pos=1.2, poa=1.5, eta=0.6, afrac=0.1, pos_phi=0.0, poa_phi=0.0, time_s=2.0):
    return {
        "name": name,
        "n": n,
        "gamma": 0.0,
        "eta": eta,
        "epsilon": 1.25 * eta,
        "delta": 0.8 * eta,
        "defender_budget_frac": 0.3,
        "attacker_budget_frac": afrac,
        "pos": pos,
        "poa": poa,
        "pos_phi": pos_phi,
        "poa_phi": poa_phi,
        "pos_status": "PROVED_OPTIMAL_NE",
        "poa_status": "PROVED_OPTIMAL_NE",
        "phi_relative": 0.0,
        "f_d": 100.0,
        "f_a": 20.0,
        "time_s": time_s,
    }


def test_single_record_aggregate_equals_row():
    report = BatchReport.build(pd.DataFrame([record("a", pos_phi=1.0, poa_phi=3.0)]))
    assert list(report.columns) == REPORT_COLUMNS
    assert list(report["kind"]) == ["instance", "aggregate"]
    row, aggregate = report.iloc[0], report.iloc[1]
    for column in ("pos", "pos_min", "pos_max", "poa", "phi", "f_d", "f_a", "time_s"):
        assert aggregate[column] == pytest.approx(row[column])
    assert aggregate["phi"] == pytest.approx(2.0)


def test_ranges_bracket_means():
    records = [record(f"r{i}", pos=1 + 0.1 * i, poa=2 - 0.2 * i) for i in range(5)]
    records.append(record("big", n=25, pos=1.0))
    report = BatchReport.build(pd.DataFrame(records), group_by="n")
    aggregates = report[report["kind"] == "aggregate"]
    assert list(aggregates["n"]) == [10, 25]
    for _, row in aggregates.iterrows():
        assert row["pos_min"] <= row["pos"] <= row["pos_max"]
        assert row["poa_min"] <= row["poa"] <= row["poa_max"]
    assert aggregates.iloc[0]["count"] == 5


def test_group_by_parameters():
    records = [record("a", afrac=0.1), record("b", afrac=0.3), record("c", afrac=0.3, n=25)]
    report = BatchReport.build(pd.DataFrame(records), group_by="params")
    aggregates = report[report["kind"] == "aggregate"]
    assert len(aggregates) == 2
    assert sorted(aggregates["count"]) == [1, 2]


def test_unknown_grouping():
    with pytest.raises(ValueError):
        BatchReport.build(pd.DataFrame([record("a")]), group_by="colour")


def test_load_write_round_trip(tmp_path):
    write_record(record("a", pos=float("inf")), tmp_path / "batch" / "a.json")
    write_record(record("b"), tmp_path / "batch" / "b.json")
    frame = BatchReport.load_records(tmp_path / "batch")
    assert math.isinf(frame.loc[frame["name"] == "a", "pos"].iloc[0])
    report = BatchReport.build(frame)
    path = BatchReport.write(report, tmp_path / "report.csv")
    assert len(pd.read_csv(path)) == 3
    assert "pos" in BatchReport.summary(report)


def test_empty_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        BatchReport.load_records(tmp_path)
