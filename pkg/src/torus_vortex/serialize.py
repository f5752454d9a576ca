"""Plain-text and binary writers for trajectories, reports and grid fields."""

import csv
import hashlib
import json
import math

import numpy as np

FLOAT_FMT = "{:.17g}"


def _fmt(x):
    return FLOAT_FMT.format(float(x))


def trajectory_header(n_vortices):
    cols = ["t"]
    for j in range(1, n_vortices + 1):
        cols += [f"x_{j}", f"y_{j}", f"lx_{j}", f"ly_{j}", f"vx_{j}", f"vy_{j}"]
    return cols + ["qx", "qy", "W", "invariant", "min_sep"]


def trajectory_rows(traj):
    wrapped = traj.positions()
    lifted = traj.positions(lifted=True)
    vel = traj.velocities()
    for k, state in enumerate(traj.samples):
        row = [state.t]
        for j in range(len(traj.degrees)):
            row += [wrapped[k, j, 0], wrapped[k, j, 1], lifted[k, j, 0], lifted[k, j, 1],
                    vel[k, j, 0], vel[k, j, 1]]
        q = traj.momentum[k]
        row += [q[0], q[1], traj.energy[k], traj.invariant[k], traj.min_sep[k]]
        yield row


def write_trajectory(traj, path):
    """CSV, one row per sample, 17 significant digits (lossless for doubles)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trajectory_header(len(traj.degrees)))
        for row in trajectory_rows(traj):
            w.writerow([_fmt(x) for x in row])


def read_trajectory(path):
    """Columns of a trajectory CSV as a dict of float arrays (header order kept)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in r] for r in reader]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def write_diagnostics(traj, path):
    """t, W, |a'|^2, invariant, drift from t = 0, r(a) per sample."""
    inv0 = traj.invariant[0] if traj.invariant else 0.0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "W", "kinetic", "invariant", "invariant_drift", "min_sep"])
        for s, e, k, inv, m in zip(traj.samples, traj.energy, traj.kinetic,
                                   traj.invariant, traj.min_sep):
            w.writerow([_fmt(x) for x in (s.t, e, k, inv, inv - inv0, m)])


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) if isinstance(x, (float, np.floating)) else x for x in r])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def digest(params):
    """sha256 of the canonical JSON of ``params``."""
    blob = json.dumps(_jsonable(params), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_json(path, record):
    with open(path, "w") as fh:
        json.dump(_jsonable(record), fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- grid fields ------------------------------------------------------------

def write_field(values, path, fmt="bin"):
    """Row-major node (i, j) at (i/n, j/n), real and imaginary parts interleaved.

    ``bin`` writes little-endian float64 preceded by the grid size as int64;
    ``csv`` writes one node per line: i, j, re, im.
    """
    v = np.asarray(values, dtype=complex)
    n = v.shape[0]
    if fmt == "bin":
        inter = np.empty((n, n, 2), dtype="<f8")
        inter[..., 0], inter[..., 1] = v.real, v.imag
        with open(path, "wb") as fh:
            fh.write(np.array([n], dtype="<i8").tobytes())
            fh.write(inter.tobytes(order="C"))
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "j", "re", "im"])
            for i in range(n):
                for j in range(n):
                    w.writerow([i, j, _fmt(v[i, j].real), _fmt(v[i, j].imag)])
    else:
        raise ValueError(f"unknown field format {fmt!r}")


def read_field(path, fmt="bin"):
    if fmt == "bin":
        raw = open(path, "rb").read()
        n = int(np.frombuffer(raw[:8], dtype="<i8")[0])
        inter = np.frombuffer(raw[8:], dtype="<f8").reshape(n, n, 2)
        return inter[..., 0] + 1j * inter[..., 1]
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    n = int(round(math.sqrt(len(data))))
    out = np.empty((n, n), dtype=complex)
    out[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2] + 1j * data[:, 3]
    return out
