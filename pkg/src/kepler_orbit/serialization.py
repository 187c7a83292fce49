"""CSV / JSON writers and the flat ``key = value`` config format."""

import csv
import json
import math

import numpy as np

STATE_COLUMNS = ("x1", "x2", "x3", "p1", "p2", "p3")


class ConfigError(ValueError):
    """Unreadable or invalid run configuration."""


def format_float(value):
    """17 significant digits, enough to recover any double exactly."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def write_csv(stream, columns, rows):
    """Write a header and rows; floats get 17 significant digits, other values ``str``."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating, int, np.integer)) and not isinstance(v, bool) else v for v in row])


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps_json(obj):
    """Deterministic JSON text: sorted keys, fixed indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n"


def read_state_rows(stream):
    """Read phase-space rows ``(x1, x2, x3, p1, p2, p3)`` from CSV text.

    A header is optional.  With a header the named state columns are picked
    (so a trajectory file with a leading ``t`` column works); without one each
    row must hold exactly six numbers.  Blank lines and ``#`` comments are
    skipped.
    """
    lines = [ln for ln in stream.read().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        return np.empty((0, 6))
    rows = list(csv.reader(lines))
    header = [c.strip() for c in rows[0]]
    if not all(_is_number(c) for c in header):
        missing = [c for c in STATE_COLUMNS if c not in header]
        if missing:
            raise ConfigError(f"input header lacks columns {missing}")
        idx = [header.index(c) for c in STATE_COLUMNS]
        body = rows[1:]
    else:
        if len(header) != 6:
            raise ConfigError(f"rows without a header need 6 fields, got {len(header)}")
        idx = list(range(6))
        body = rows
    out = np.empty((len(body), 6))
    for n, row in enumerate(body):
        if len(row) != len(header):
            raise ConfigError(f"input row {n} has {len(row)} fields")
        try:
            out[n] = [float(row[i]) for i in idx]
        except ValueError:
            raise ConfigError(f"input row {n} is not numeric: {row}") from None
    return out


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def parse_config(text):
    """Parse ``key = value`` lines (``#`` starts a comment); dashes in keys become underscores.

    >>> parse_config("dt = 0.01  # step\\nt-end=2")
    {'dt': '0.01', 't_end': '2'}
    """
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"config line {n}: empty key")
        out[key.replace("-", "_").lower()] = value
    return out
