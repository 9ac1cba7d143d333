import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd

from cng.models import CngInstance, PriceResult
from utils.instance_io import read_record

logger = logging.getLogger(__name__)

PARAM_KEYS = ["attacker_budget_frac", "defender_budget_frac", "eta", "epsilon", "gamma", "delta"]
GROUP_KEYS = {"n": ["n"], "params": PARAM_KEYS}

REPORT_COLUMNS = [
    "kind", "name", "n", *PARAM_KEYS,
    "pos", "pos_min", "pos_max", "poa", "poa_min", "poa_max",
    "phi", "f_d", "f_a", "time_s", "count",
]


def batch_record(name: str, instance: CngInstance, pos: PriceResult, poa: PriceResult) -> Dict[str, Any]:
    """Per-instance record written by ``cng batch``.

    Time is the total over both solver runs, f^d comes from the defender run
    and f^a from the attacker run.
    """
    return {
        "name": name,
        "n": instance.n,
        "gamma": instance.gamma,
        "eta": instance.eta,
        "epsilon": instance.epsilon,
        "delta": instance.delta,
        "defender_budget_frac": round(instance.D / math.fsum(instance.d), 6),
        "attacker_budget_frac": round(instance.A / math.fsum(instance.a), 6),
        "pos": pos.value,
        "poa": poa.value,
        "pos_phi": pos.phi,
        "poa_phi": poa.phi,
        "pos_status": pos.best_ne.status.value,
        "poa_status": poa.best_ne.status.value,
        "phi_relative": pos.best_ne.phi_relative,
        "f_d": pos.best_ne.defender_value,
        "f_a": poa.best_ne.attacker_value,
        "time_s": pos.best_ne.wall_time + poa.best_ne.wall_time,
    }


class BatchReport:
    """Aggregates batch records into result tables, one block per group."""

    @staticmethod
    def load_records(directory: Union[str, Path]) -> pd.DataFrame:
        directory = Path(directory)
        paths = sorted(directory.glob("*.json"))
        if not paths:
            raise FileNotFoundError(f"no batch records found in {directory}")
        frame = pd.DataFrame([read_record(path) for path in paths])
        # infinite prices are stored as strings
        for column in ("pos", "poa", "phi_relative"):
            if column in frame:
                frame[column] = frame[column].map(float)
        logger.info(f"Loaded {len(frame)} batch records from {directory}")
        return frame

    @staticmethod
    def build(records: pd.DataFrame, group_by: str = "n") -> pd.DataFrame:
        """Instance rows followed, per group, by one aggregate row.

        Args:
            records: Frame of batch records
            group_by: "n" for one block per size, "params" for one block per
                (A%, D%, eta, epsilon, gamma, delta) combination

        Returns:
            Report frame with REPORT_COLUMNS
        """
        if group_by not in GROUP_KEYS:
            raise ValueError(f"unknown grouping {group_by!r}, expected one of {sorted(GROUP_KEYS)}")
        keys = GROUP_KEYS[group_by]
        frame = records.copy()
        frame["phi"] = (frame["pos_phi"] + frame["poa_phi"]) / 2

        blocks: List[pd.DataFrame] = []
        for _, group in frame.groupby(keys, sort=True):
            rows = group.sort_values("name").assign(
                kind="instance",
                pos_min=group["pos"],
                pos_max=group["pos"],
                poa_min=group["poa"],
                poa_max=group["poa"],
                count=1,
            )
            aggregate = {key: group[key].iloc[0] for key in keys}
            aggregate.update(
                kind="aggregate",
                name="mean",
                pos=group["pos"].mean(),
                pos_min=group["pos"].min(),
                pos_max=group["pos"].max(),
                poa=group["poa"].mean(),
                poa_min=group["poa"].min(),
                poa_max=group["poa"].max(),
                phi=group["phi"].mean(),
                f_d=group["f_d"].mean(),
                f_a=group["f_a"].mean(),
                time_s=group["time_s"].mean(),
                count=len(group),
            )
            blocks.append(rows)
            blocks.append(pd.DataFrame([aggregate]))

        report = pd.concat(blocks, ignore_index=True).reindex(columns=REPORT_COLUMNS)
        report["n"] = report["n"].astype("Int64")
        report["count"] = report["count"].astype("Int64")
        return report

    @staticmethod
    def write(report: pd.DataFrame, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        report.to_csv(path, index=False)
        logger.info(f"Wrote report with {len(report)} rows to {path}")
        return path

    @staticmethod
    def summary(report: pd.DataFrame) -> str:
        """Two-decimal rendering of the aggregate rows."""
        aggregates = report[report["kind"] == "aggregate"].drop(columns=["kind", "name"])
        return aggregates.to_string(index=False, float_format=lambda v: f"{v:.2f}")
