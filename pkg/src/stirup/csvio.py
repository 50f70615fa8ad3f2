"""CSV read/write with a header row and 12 significant digits."""
import csv
import os

import numpy as np


def fmt(value):
    if isinstance(value, (str, bool, np.bool_)):
        return str(int(value)) if isinstance(value, (bool, np.bool_)) else value
    return format(float(value), ".12g")


def write_csv(path, header, rows):
    """Write ``rows`` (iterable of sequences) under ``header``; returns path."""
    d = os.path.dirname(os.fspath(path))
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path, numeric=True):
    """Return (header, rows); rows is a float array when ``numeric``."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        body = [row for row in r if row]
    if not numeric:
        return header, body
    rows = np.array([[float(v) for v in row] for row in body], dtype=float)
    if rows.size == 0:
        rows = np.empty((0, len(header or [])))
    return header, rows
