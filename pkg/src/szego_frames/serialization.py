"""File and stream helpers shared by the command line tools.

CSV values use ``%.17g`` with a ``.`` decimal separator regardless of
locale. JSON floats are written by the standard encoder, which emits the
shortest string that round-trips the double exactly.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
from datetime import datetime, timezone

from . import __version__


def fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n"


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def read_json(path: str):
    return json.loads(read_text(path))


def write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the stamp for reproducible builds
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def manifest(command: str, parameters: dict, seed) -> dict:
    return {
        "command": command,
        "parameters": parameters,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": timestamp(),
    }


def manifest_path(out: str) -> str:
    return out + ".manifest.json"


def read_csv(path: str) -> tuple[list[str], list[dict]]:
    text = read_text(path)
    reader = csv.DictReader(io.StringIO(text))
    return list(reader.fieldnames or []), list(reader)
