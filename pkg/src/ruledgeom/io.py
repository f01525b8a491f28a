"""Deterministic CSV and OBJ writers."""

import csv
from pathlib import Path

import numpy as np


def fmt(x):
    """Shortest-safe text for a float: 17 significant digits, 'nan' for NaN."""
    x = float(x)
    if np.isnan(x):
        return "nan"
    return "%.17g" % (x + 0.0)  # no negative zero


def write_csv(path, header, rows):
    """Write numeric rows; integer-valued columns named in ``header`` stay floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (str, int, np.integer)) else fmt(v) for v in row])


def read_csv(path):
    """Read a numeric CSV into a dict of float columns."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) for v in row] for row in r if row]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {h: arr[:, i] for i, h in enumerate(header)}


def write_obj(path, vertices, faces=(), lines=(), comment=None):
    """Vertices ``(n, 3)``, faces and polylines as 0-based index sequences."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for v in vertices:
            fh.write("v " + " ".join(fmt(c) for c in v) + "\n")
        for f in faces:
            fh.write("f " + " ".join(str(i + 1) for i in f) + "\n")
        for ln in lines:
            if len(ln) > 1:
                fh.write("l " + " ".join(str(i + 1) for i in ln) + "\n")


def grid_mesh(points, valid):
    """Vertices and quad faces for an ``(nu, nv, 3)`` grid; invalid nodes are dropped.

    Returns ``(vertices, faces, index)`` where ``index[i, j]`` is the vertex
    number of node ``(i, j)`` or -1.
    """
    nu, nv = valid.shape
    index = -np.ones((nu, nv), dtype=int)
    index[valid] = np.arange(int(valid.sum()))
    faces = []
    for i in range(nu - 1):
        for j in range(nv - 1):
            q = (index[i, j], index[i + 1, j], index[i + 1, j + 1], index[i, j + 1])
            if min(q) >= 0:
                faces.append(q)
    return points[valid], faces, index
