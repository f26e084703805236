"""Text serialization of point samples and order lists.

Format: UTF-8, one point per line, comma-separated decimal floats; blank
lines and lines starting with '#' are ignored. Floats are written with 17
significant digits, so a write/read round trip is bit-exact.
"""

import numpy as np

__all__ = ["SampleParseError", "read_sample", "write_sample", "read_orders"]


class SampleParseError(ValueError):
    def __init__(self, path, line_number, reason):
        super().__init__(f"{path}:{line_number}: {reason}")
        self.path = str(path)
        self.line_number = int(line_number)
        self.reason = reason


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for number, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield number, line


def read_sample(path):
    """Read a point sample; returns an (n, d) float array."""
    rows = []
    width = None
    for number, line in _data_lines(path):
        parts = line.split(",")
        try:
            row = [float(p) for p in parts]
        except ValueError:
            raise SampleParseError(path, number, f"bad number in {line!r}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SampleParseError(
                path, number, f"expected {width} coordinates, got {len(row)}"
            )
        rows.append(row)
    if not rows:
        raise SampleParseError(path, 0, "no data lines")
    arr = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise SampleParseError(path, 0, "sample contains non-finite values")
    return arr


def write_sample(path, points):
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    with open(path, "w", encoding="utf-8") as fh:
        for row in points:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def read_orders(path):
    """Read a per-point neighbor-order list: one positive integer per line."""
    out = []
    for number, line in _data_lines(path):
        try:
            value = int(line)
        except ValueError:
            raise SampleParseError(path, number, f"bad integer {line!r}") from None
        if value < 1:
            raise SampleParseError(path, number, f"order must be >= 1, got {value}")
        out.append(value)
    if not out:
        raise SampleParseError(path, 0, "no data lines")
    return np.asarray(out, dtype=np.int64)
