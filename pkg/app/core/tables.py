"""Table and JSON writers shared by the stage outputs.

Undefined values are written as the explicit marker ``NA`` in both layouts.
Files are written under a ``.partial`` name and renamed when complete, so a
crashed stage leaves only clearly marked partial outputs behind.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any

import pandas as pd

from app.core.config import TableFormat

logger = logging.getLogger(__name__)

NA = "NA"
PARTIAL_SUFFIX = ".partial"


def partial_path(path: Path) -> Path:
    return path.with_name(path.name + PARTIAL_SUFFIX)


def _native(value: Any) -> Any:
    if value is None or value is pd.NA:
        return NA
    if isinstance(value, float) and math.isnan(value):
        return NA
    if hasattr(value, "item"):
        return _native(value.item())
    return value


def write_table(frame: pd.DataFrame, path: Path, table_format: TableFormat = TableFormat.TSV) -> Path:
    """Write a DataFrame as TSV (with header) or JSON-lines.

    Returns:
        The final path written.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = partial_path(path)
    if table_format == TableFormat.TSV:
        frame.to_csv(tmp, sep="\t", index=False, na_rep=NA, lineterminator="\n")
    else:
        with open(tmp, "w", encoding="utf-8") as f:
            for record in frame.to_dict(orient="records"):
                row = {str(k): _native(v) for k, v in record.items()}
                f.write(json.dumps(row, ensure_ascii=False) + "\n")
    tmp.replace(path)
    logger.info(f"Wrote {len(frame):,} rows to {path}")
    return path


def read_table(path: Path, table_format: TableFormat = TableFormat.TSV) -> pd.DataFrame:
    """Read a table written by ``write_table``; ``NA`` cells become missing values."""
    if table_format == TableFormat.TSV:
        return pd.read_csv(
            path, sep="\t", na_values=[NA], keep_default_na=False, dtype={"paper_id": str, "focal_id": str}
        )
    frame = pd.read_json(path, lines=True, dtype=False)
    return frame.replace(NA, pd.NA)


def write_json(payload: dict[str, Any], path: Path) -> Path:
    """Write a JSON sidecar or manifest (sorted keys, stable across runs)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = partial_path(path)
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=str)
        f.write("\n")
    tmp.replace(path)
    return path
