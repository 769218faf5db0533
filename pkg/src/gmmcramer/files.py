"""Model (JSON) and point (CSV) file formats used by the command line."""

import csv
import json

import numpy as np

from .gmm1d import Gmm1
from .gmm_nd import GmmN


class PointsFileError(ValueError):
    pass


def model_to_dict(model):
    if isinstance(model, Gmm1):
        comps = [{"weight": float(w), "mean": [float(m)], "scale": [[abs(float(s))]]}
                 for w, m, s in zip(model.weights, model.means, model.stds)]
        return {"dim": 1, "components": comps}
    comps = [{"weight": float(w), "mean": [float(x) for x in mu],
              "scale": [[float(x) for x in row] for row in S]}
             for w, mu, S in zip(model.weights, model.means, model.scales)]
    return {"dim": int(model.dim), "components": comps}


def model_from_dict(doc):
    dim = int(doc["dim"])
    comps = doc["components"]
    if dim < 1 or not comps:
        raise ValueError("model needs dim >= 1 and at least one component")
    w = np.array([c["weight"] for c in comps], dtype=float)
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"component weights sum to {w.sum()!r}, not 1")
    mu = np.array([c["mean"] for c in comps], dtype=float)
    S = np.array([c["scale"] for c in comps], dtype=float)
    if mu.shape != (len(comps), dim) or S.shape != (len(comps), dim, dim):
        raise ValueError("mean must have length dim and scale must be dim x dim")
    if dim == 1:
        return Gmm1(w, mu[:, 0], S[:, 0, 0])
    return GmmN(w, mu, S)


def dumps_model(model):
    # json writes floats with repr, the shortest string that parses back exactly
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def save_model(model, path):
    with open(path, "w") as fh:
        fh.write(dumps_model(model))


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def load_points(path, header=False):
    """Read a headerless CSV of floats; raises :class:`PointsFileError` with
    the offending row and column."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise PointsFileError(f"row {lineno}: expected {width} columns, found {len(row)}")
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise PointsFileError(f"row {lineno}, column {col}: not a number: {cell!r}") from None
            rows.append(vals)
    if not rows:
        raise PointsFileError("no data rows")
    return np.array(rows)


def save_points(points, path):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 1 and np.ndim(points) == 1:
        pts = pts.T
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in pts:
            w.writerow([repr(float(x)) for x in row])


def save_history(losses, path, header=("step", "loss")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, v in enumerate(losses):
            w.writerow([i, repr(float(v))])
