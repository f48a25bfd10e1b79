"""Plain-text state checkpoints, CSV logs and legacy VTK export."""

import csv
import warnings

import numpy as np

from .assemble import ShellState

LOG_COLUMNS = ("iter", "membrane", "curvature", "load", "total", "grad_inf_norm", "step")


class StateIOError(ValueError):
    pass


class OutputError(OSError):
    pass


def write_state(path, state):
    """Header `n1 n2`, then one row `m1 m2 m3 q11 ... q33` per node (C order)."""
    n1, n2 = state.shape
    rows = np.concatenate([state.m.reshape(-1, 3), state.Q.reshape(-1, 9)], axis=1)
    try:
        with open(path, "w") as fh:
            fh.write(f"{n1} {n2}\n")
            np.savetxt(fh, rows, fmt="%.17g")
    except OSError as exc:
        raise OutputError(f"cannot write state to {path}: {exc}") from exc


def read_state(path, grid=None, rot_tol=1e-10):
    try:
        with open(path) as fh:
            header = fh.readline().split()
            with warnings.catch_warnings():
                # an empty body is reported below as a shape error
                warnings.simplefilter("ignore", UserWarning)
                rows = np.loadtxt(fh, ndmin=2)
    except (OSError, ValueError) as exc:
        raise StateIOError(f"cannot read state {path}: {exc}") from exc
    if len(header) != 2:
        raise StateIOError("state header must be `n1 n2`")
    try:
        n1, n2 = int(header[0]), int(header[1])
    except ValueError as exc:
        raise StateIOError("state header must hold two integers") from exc
    if rows.shape != (n1 * n2, 12):
        raise StateIOError(f"expected {n1 * n2} rows of 12 values, got {rows.shape}")
    if not np.all(np.isfinite(rows)):
        raise StateIOError("state contains non-finite values")
    if grid is not None and (n1, n2) != grid.shape:
        raise StateIOError(f"state is {n1}x{n2} but the grid is {grid.n1}x{grid.n2}")
    m = rows[:, :3].reshape(n1, n2, 3)
    Q = rows[:, 3:].reshape(n1, n2, 3, 3)
    QtQ = np.swapaxes(Q, -1, -2) @ Q
    if np.max(np.abs(QtQ - np.eye(3))) > rot_tol or np.any(np.linalg.det(Q) <= 0):
        raise StateIOError("state rotations are not in SO(3)")
    return ShellState(m, Q)


def write_log(path, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(LOG_COLUMNS)
            for r in rows:
                w.writerow([r["iter"]] + [repr(float(r[c])) for c in LOG_COLUMNS[1:]])
    except OSError as exc:
        raise OutputError(f"cannot write log {path}: {exc}") from exc


def read_log(path):
    with open(path) as fh:
        rd = csv.DictReader(fh)
        return [{k: (int(v) if k == "iter" else float(v)) for k, v in r.items()} for r in rd]


def write_table(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_vtk(path, state, point_scalars=None, point_vectors=None, title="cosserat shell"):
    """Legacy ASCII POLYDATA: nodes of m, quads of the lattice, point data."""
    n1, n2 = state.shape
    pts = state.m.reshape(-1, 3)
    idx = np.arange(n1 * n2).reshape(n1, n2)
    quads = np.stack([idx[:-1, :-1], idx[1:, :-1], idx[1:, 1:], idx[:-1, 1:]], -1).reshape(-1, 4)
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET POLYDATA",
             f"POINTS {len(pts)} double"]
    lines += [" ".join(repr(float(v)) for v in p) for p in pts]
    lines.append(f"POLYGONS {len(quads)} {5 * len(quads)}")
    lines += ["4 " + " ".join(str(int(v)) for v in q) for q in quads]
    lines.append(f"POINT_DATA {len(pts)}")
    for name, arr in (point_scalars or {}).items():
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [repr(float(v)) for v in np.ravel(arr)]
    for name, arr in (point_vectors or {}).items():
        lines.append(f"VECTORS {name} double")
        lines += [" ".join(repr(float(v)) for v in row) for row in np.reshape(arr, (-1, 3))]
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write VTK file {path}: {exc}") from exc


def read_vtk(path):
    """Minimal parser for files produced by write_vtk (used for conformance tests)."""
    with open(path) as fh:
        tok = fh.read().split("\n")
    if tok[0].strip() != "# vtk DataFile Version 3.0":
        raise ValueError("not a legacy VTK 3.0 file")
    if tok[2].strip() != "ASCII" or tok[3].strip() != "DATASET POLYDATA":
        raise ValueError("expected ASCII POLYDATA")
    i = 4
    npts = int(tok[i].split()[1])
    pts = np.array([[float(v) for v in tok[i + 1 + k].split()] for k in range(npts)])
    i += 1 + npts
    head = tok[i].split()
    if head[0] != "POLYGONS":
        raise ValueError("expected POLYGONS")
    npoly, size = int(head[1]), int(head[2])
    polys = [list(map(int, tok[i + 1 + k].split())) for k in range(npoly)]
    if sum(len(p) for p in polys) != size:
        raise ValueError("POLYGONS size field does not match")
    i += 1 + npoly
    if tok[i].split()[0] != "POINT_DATA" or int(tok[i].split()[1]) != npts:
        raise ValueError("expected POINT_DATA for every point")
    i += 1
    data = {}
    while i < len(tok) and tok[i].strip():
        parts = tok[i].split()
        if parts[0] == "SCALARS":
            vals = [float(tok[i + 2 + k]) for k in range(npts)]
            data[parts[1]] = np.array(vals)
            i += 2 + npts
        elif parts[0] == "VECTORS":
            vals = [[float(v) for v in tok[i + 1 + k].split()] for k in range(npts)]
            data[parts[1]] = np.array(vals)
            i += 1 + npts
        else:
            raise ValueError(f"unexpected section {parts[0]}")
    return pts, polys, data
