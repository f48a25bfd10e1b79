"""Deterministic initial states and load fields used by the CLI and scripts."""

import numpy as np
from numpy.polynomial import polynomial as P

from .assemble import ShellState, identity_state
from .rotalg import exp_so3


def _unit_coords(grid):
    b = grid.bounds
    X1, X2 = np.meshgrid(grid.x1, grid.x2, indexing="ij")
    return (X1 - b[0]) / (b[1] - b[0]), (X2 - b[2]) / (b[3] - b[2])


def smooth_fields(grid, amplitude):
    """Smooth displacement and rotation-vector fields on the unit square."""
    s1, s2 = _unit_coords(grid)
    v = amplitude * np.stack([np.sin(s1 + s2), s1 * s2, np.cos(2.0 * s1)], -1)
    th = 4.0 * amplitude * np.stack([np.sin(s1), s2 ** 2, s1 * s2], -1)
    return v, th


def smooth_state(grid, patch, amplitude=0.05):
    """m = y0 + v, Q = exp(anti(theta)) with the smooth_fields profiles.

    Nodes on Dirichlet edges keep m = y0.
    """
    base = identity_state(grid, patch)
    v, th = smooth_fields(grid, amplitude)
    v = np.where(grid.dirichlet_mask.reshape(grid.shape)[..., None], 0.0, v)
    return ShellState(base.m + v, exp_so3(th))


def noise_state(grid, patch, amplitude=1e-2, seed=0):
    """Identity state plus i.i.d. tangent noise (Dirichlet nodes untouched)."""
    rng = np.random.default_rng(seed)
    base = identity_state(grid, patch)
    dm = amplitude * rng.standard_normal(base.m.shape)
    dm[grid.dirichlet_mask.reshape(grid.shape)] = 0.0
    dw = amplitude * rng.standard_normal(base.m.shape)
    return ShellState(base.m + dm, exp_so3(dw))


def initial_state(kind, grid, patch, amplitude=0.0, seed=0):
    if kind == "identity":
        return identity_state(grid, patch)
    if kind == "smooth":
        return smooth_state(grid, patch, amplitude)
    if kind == "noise":
        return noise_state(grid, patch, amplitude, seed)
    raise ValueError(f"unknown initial state {kind!r}")


def load_field(spec, grid, tail):
    """Constant value, or {"value": c, "x1": p, "x2": q} meaning c p(x1) q(x2)."""
    if spec is None:
        return None
    if isinstance(spec, dict):
        c = np.asarray(spec["value"], dtype=float)
        if c.shape != tail:
            raise ValueError(f"load value must have shape {tail}")
        X1, X2 = np.meshgrid(grid.x1, grid.x2, indexing="ij")
        f = P.polyval(X1, spec.get("x1", [1.0])) * P.polyval(X2, spec.get("x2", [1.0]))
        return f.reshape(f.shape + (1,) * len(tail)) * c
    c = np.asarray(spec, dtype=float)
    if c.shape != tail:
        raise ValueError(f"constant load must have shape {tail}")
    return c
