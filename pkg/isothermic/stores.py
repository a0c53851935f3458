"""Reading profile samples and writing reports, series and field dumps."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import SurfaceSpecError
from .fcq import FCQSeries
from .fields import ScalarField
from .models import DetectionReport

logger = logging.getLogger(__name__)


def _serialize(value: Any) -> Any:
    """JSON-ready copy; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(key): _serialize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_serialize(item) for item in value]
    if isinstance(value, np.ndarray):
        return _serialize(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def dumps(payload: Any) -> str:
    return json.dumps(_serialize(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def report_json(report: DetectionReport) -> str:
    return dumps(report.model_dump(mode="json", by_alias=True))


def write_report(report: DetectionReport, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_json(report), encoding="utf-8")
    logger.info("Wrote report to %s", path)
    return path


def write_field_csv(field: ScalarField, path: str | Path, column: str = "value") -> Path:
    """Two-column ``u,<column>`` CSV; curvature exports use ``k`` so read_profile_csv takes them back."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([field.grid.nodes(), field.samples])
    np.savetxt(path, table, delimiter=",", header=f"u,{column}", comments="", fmt="%.17g")
    return path


def read_profile_csv(path: str | Path) -> np.ndarray:
    """Curvature samples from the ``k`` column of a CSV file with a header row."""
    try:
        table = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
    except OSError as exc:
        raise SurfaceSpecError(f"cannot read profile samples from {path}: {exc}") from exc
    if table.dtype.names is None or "k" not in table.dtype.names:
        raise SurfaceSpecError(f"profile CSV {path} has no 'k' column")
    return np.atleast_1d(np.asarray(table["k"], dtype=float))


def series_payload(series: FCQSeries) -> dict[str, Any]:
    return {
        "depth": series.depth,
        "r": list(series.r.coefficients),
        "sign": series.sign,
        "coefficients": {
            str(i): {
                "gamma": series.gamma[i].samples,
                "delta": series.delta[i].samples,
                "alpha": series.alpha[i].samples,
                "beta": series.beta[i].samples,
                "p": series.p[i].samples,
            }
            for i in series.indices
        },
    }


def write_series_json(series: FCQSeries, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(series_payload(series)), encoding="utf-8")
    return path

