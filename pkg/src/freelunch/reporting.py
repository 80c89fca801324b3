"""Deterministic CSV/JSON writers that stamp every file with run metadata."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from .innovation import PRNG_ID

__all__ = ["run_metadata", "write_csv", "write_json", "fmt"]


def run_metadata(config_hash: str | None, seed: int | None) -> dict:
    from . import __version__

    return {"config_hash": config_hash, "seed": seed, "prng": PRNG_ID, "version": __version__}


def fmt(v) -> str:
    """Shortest round-trip text for numbers; other values via ``str``."""
    if v is None:
        return ""
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        v = v.item()  # numpy scalar
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return fmt(obj)
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _jsonable(obj.item())
    return obj


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], meta: dict) -> Path:
    """CSV with ``# key=value`` metadata lines ahead of the header."""
    buf = io.StringIO()
    for k in sorted(meta):
        buf.write(f"# {k}={fmt(meta[k])}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    path = Path(path)
    path.write_text(buf.getvalue())
    return path


def write_json(path: Path, payload: dict, meta: dict) -> Path:
    doc = dict(_jsonable(payload))
    doc["metadata"] = _jsonable(meta)
    path = Path(path)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path
