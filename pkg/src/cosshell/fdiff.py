"""Finite-difference stencils on uniform 1D lattices."""

from math import factorial

import numpy as np
import scipy.sparse as sp


def fd_weights(offsets, deriv):
    """Weights w with sum_k w_k f(x + s_k) ~ f^(deriv)(x) on unit spacing."""
    s = np.asarray(offsets, dtype=float)
    n = len(s)
    V = np.array([s ** p / factorial(p) for p in range(n)])
    rhs = np.zeros(n)
    rhs[deriv] = 1.0
    return np.linalg.solve(V, rhs)


def diff_matrix(n, spacing, deriv=1, order=2):
    """Sparse (n x n) derivative operator of the given even accuracy order.

    Interior rows use the symmetric (order + 1)-point stencil; rows too close to
    an end use one-sided stencils of order + deriv points, which keeps the
    accuracy order up to the boundary.
    """
    inner_w = order + 1
    edge_w = order + deriv
    if n < edge_w:
        raise ValueError(f"need at least {edge_w} nodes for this stencil, got {n}")
    half = inner_w // 2
    rows, cols, vals = [], [], []
    for i in range(n):
        if half <= i < n - half:
            idx = np.arange(i - half, i + half + 1)
        elif i < half:
            idx = np.arange(0, edge_w)
        else:
            idx = np.arange(n - edge_w, n)
        w = fd_weights(idx - i, deriv) / spacing ** deriv
        rows.extend([i] * len(idx))
        cols.extend(idx.tolist())
        vals.extend(w.tolist())
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
