# app/utils/helpers/artifacts.py
import hashlib
import json
from pathlib import Path
from typing import Iterable, Optional, Union

import pandas as pd
from pydantic import BaseModel

from app.core.config import settings
from app.utils.logging_config import logger

CSV_FLOAT_FORMAT = "%.17g"


def input_hash(config: dict, seed: int) -> str:
    """SHA-256 over the canonical JSON of (config, seed)."""
    payload = json.dumps({"config": config, "seed": seed}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def output_directory(output_dir: Optional[str], mode: str) -> Path:
    path = Path(output_dir) if output_dir else Path(settings.OUTPUT_ROOT) / mode
    path.mkdir(parents=True, exist_ok=True)
    return path


def _records(rows: Iterable[Union[BaseModel, dict]]) -> list[dict]:
    return [row.model_dump() if isinstance(row, BaseModel) else dict(row) for row in rows]


def write_table(rows: Iterable[Union[BaseModel, dict]], path: Path, columns: Optional[list[str]] = None) -> Path:
    """Write rows as CSV with full float precision and '\\n' line endings."""
    frame = pd.DataFrame(_records(rows), columns=columns)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_json(payload: Union[BaseModel, dict], path: Path) -> Path:
    data = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else payload
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path
