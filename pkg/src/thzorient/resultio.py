"""Result files: ``#``-prefixed metadata header followed by a CSV data section.

Files are written to a temporary sibling and renamed into place, so a
reader never sees a half-written file.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile

from . import __version__


def atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x) -> str:
    """12 significant digits; empty field for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return ""
    return f"{x:.12g}"


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def render_csv(meta: dict, header, rows) -> str:
    out = io.StringIO()
    out.write(f"# thzorient {__version__}\n")
    for key, value in meta.items():
        out.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return out.getvalue()


def write_csv(path, meta: dict, header, rows) -> None:
    atomic_write(path, render_csv(meta, header, rows))


def split_result(text: str) -> tuple[dict, str]:
    """Separate metadata (parsed) from the data section (raw text)."""
    meta = {}
    lines = text.splitlines(keepends=True)
    k = 0
    while k < len(lines) and lines[k].startswith("#"):
        body = lines[k][1:].strip()
        if ": " in body:
            key, value = body.split(": ", 1)
            meta[key] = json.loads(value)
        k += 1
    return meta, "".join(lines[k:])


def read_csv(path):
    """Return ``(meta, header, rows)`` with rows as lists of strings."""
    with open(path, encoding="utf-8") as fh:
        meta, data = split_result(fh.read())
    rows = list(csv.reader(io.StringIO(data)))
    return meta, rows[0], rows[1:]
