"""Delimited and JSON outputs carrying a reproducibility header.

CSV files start with ``#``-prefixed lines holding the run configuration as
JSON.  Floats are written with 17 significant digits and ``.`` as decimal
separator, so identical configurations give byte-identical files.
"""

import csv
import io
import json
import math
from pathlib import Path

from . import __version__

FLOAT_FORMAT = "{:.17g}"


def fmt(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return FLOAT_FORMAT.format(x)
    return str(x)


def header_block(config):
    return {"artifact": "entmap", "version": __version__, "seed": config.get("seed"), "config": config}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):
        return obj.item()
    if hasattr(obj, "value") and not isinstance(obj, (int, float, str)):
        return obj.value
    return obj


def write_csv(path, config, columns, rows):
    buf = io.StringIO()
    header = json.dumps(_jsonable(header_block(config)), sort_keys=True)
    buf.write(f"# {header}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_csv(path):
    """Rows of a file written by :func:`write_csv` as dicts, header comment skipped."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def read_header(path):
    first = Path(path).read_text().splitlines()[0]
    return json.loads(first[2:])


def write_json(path, config, payload):
    doc = {"header": header_block(config), **payload}
    Path(path).write_text(json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n")
