"""
CSV emission.

Every file starts with a block of '#' lines carrying the manifest hash and the
constants report, followed by an RFC-4180 table (CRLF line ends, '.' decimal
separator). Floats are written with 17 significant digits so they round-trip
exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from config.settings import OUTPUT_SETTINGS

_FLOAT_FORMAT = OUTPUT_SETTINGS['csv_float_format']


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) or hasattr(value, 'dtype'):
        return format(float(value), _FLOAT_FORMAT)
    return str(value)


def write_csv(path, fields: Sequence[str], rows: Iterable[Sequence[Any]],
              manifest_hash: str, header: Optional[Mapping[str, str]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# manifest_sha256={manifest_hash}\r\n")
        for key, value in (header or {}).items():
            f.write(f"# {key}={value}\r\n")
        writer = csv.writer(f, lineterminator="\r\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([format_cell(value) for value in row])
    return path


def read_csv(path) -> Tuple[Dict[str, str], List[Dict[str, str]]]:
    """(header block, rows as dicts of strings)."""
    header: Dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as f:
        lines = f.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key] = value
        else:
            body.append(line)
    return header, list(csv.DictReader(body))
