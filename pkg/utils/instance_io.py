import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Union

from pydantic import ValidationError

from cng.errors import ErrorCode, InstanceError
from cng.models import CngInstance
from cng.payoffs import validate

logger = logging.getLogger(__name__)

INSTANCE_KEYS = ("n", "p_d", "p_a", "d", "a", "D", "A", "delta", "eta", "epsilon", "gamma")


def format_float(value: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    if not math.isfinite(value):
        raise InstanceError(ErrorCode.RANGE_VIOLATION, f"cannot serialize non-finite number {value}")
    return format(float(value), ".17g")


class InstanceStore:
    """Canonical JSON codec for game instances.

    Keys are written in a fixed order without whitespace and every real number
    with 17 significant digits, so load followed by write reproduces the bytes
    of any file this class wrote.
    """

    @staticmethod
    def dumps(instance: CngInstance) -> str:
        parts = [f'"n":{instance.n}']
        for key in ("p_d", "p_a", "d", "a"):
            values = ",".join(format_float(v) for v in getattr(instance, key))
            parts.append(f'"{key}":[{values}]')
        for key in ("D", "A", "delta", "eta", "epsilon", "gamma"):
            parts.append(f'"{key}":{format_float(getattr(instance, key))}')
        if instance.edges is not None:
            edges = ",".join(f"[{u},{v},{format_float(t)}]" for u, v, t in instance.edges)
            parts.append(f'"edges":[{edges}]')
        return "{" + ",".join(parts) + "}\n"

    @staticmethod
    def loads(text: str, check: bool = True) -> CngInstance:
        """Parse an instance document.

        Args:
            text: JSON text following the instance schema
            check: Also run the game invariant checks

        Returns:
            The parsed instance
        """
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise InstanceError(ErrorCode.INVALID_INSTANCE, f"instance is not valid JSON: {e}") from e
        if not isinstance(payload, dict):
            raise InstanceError(ErrorCode.INVALID_INSTANCE, "instance document must be a JSON object")
        missing = [key for key in INSTANCE_KEYS if key not in payload]
        if missing:
            raise InstanceError(ErrorCode.INVALID_INSTANCE, f"instance is missing keys {missing}")
        try:
            instance = CngInstance.model_validate(payload)
        except ValidationError as e:
            raise InstanceError(ErrorCode.INVALID_INSTANCE, str(e)) from e
        if check:
            validate(instance)
        return instance

    @staticmethod
    def load(path: Union[str, Path], check: bool = True) -> CngInstance:
        path = Path(path)
        logger.info(f"Loading instance from {path}")
        return InstanceStore.loads(path.read_text(), check=check)

    @staticmethod
    def save(instance: CngInstance, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(InstanceStore.dumps(instance))
        logger.info(f"Wrote instance with {instance.n} nodes to {path}")
        return path


def jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def write_record(record: Dict[str, Any], path: Union[str, Path]) -> Path:
    """Write a result record; infinite prices are stored as the strings "inf"/"-inf"."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(record), indent=2) + "\n")
    return path


def read_record(path: Union[str, Path]) -> Dict[str, Any]:
    return json.loads(Path(path).read_text())
