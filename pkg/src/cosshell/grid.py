"""Node lattice over the parameter rectangle and the grid-consistent geometry."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fdiff import diff_matrix
from .surface import frame_from_gradients

EDGES = ("x1min", "x1max", "x2min", "x2max")


def _trapezoid(n, spacing):
    w = np.full(n, spacing)
    w[0] = w[-1] = 0.5 * spacing
    return w


@dataclass
class ShellGrid:
    """Uniform n1 x n2 node lattice; nodes are flattened in C order (i, j)."""

    n1: int
    n2: int
    bounds: tuple
    dirichlet_edges: tuple = ()
    x1: np.ndarray = field(init=False)
    x2: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n1 < 3 or self.n2 < 3:
            raise ValueError("grid needs at least 3 nodes per direction")
        self.bounds = tuple(map(float, self.bounds))
        b = self.bounds
        if not (b[1] > b[0] and b[3] > b[2]):
            raise ValueError("grid bounds must be increasing")
        for e in self.dirichlet_edges:
            if e not in EDGES:
                raise ValueError(f"unknown edge {e!r}")
        self.dirichlet_edges = tuple(self.dirichlet_edges)
        self.x1 = np.linspace(b[0], b[1], self.n1)
        self.x2 = np.linspace(b[2], b[3], self.n2)
        self.dx1 = self.x1[1] - self.x1[0]
        self.dx2 = self.x2[1] - self.x2[0]
        w1 = _trapezoid(self.n1, self.dx1)
        w2 = _trapezoid(self.n2, self.dx2)
        self.weights = np.outer(w1, w2).ravel()
        self._w1, self._w2 = w1, w2
        I1 = sp.identity(self.n1, format="csr")
        I2 = sp.identity(self.n2, format="csr")
        self.D1 = sp.kron(diff_matrix(self.n1, self.dx1), I2, format="csr")
        self.D2 = sp.kron(I1, diff_matrix(self.n2, self.dx2), format="csr")
        self.D1T = self.D1.T.tocsr()
        self.D2T = self.D2.T.tocsr()
        self.dirichlet_mask = self.edge_mask(self.dirichlet_edges)

    @property
    def shape(self):
        return (self.n1, self.n2)

    @property
    def size(self):
        return self.n1 * self.n2

    @property
    def area(self):
        b = self.bounds
        return (b[1] - b[0]) * (b[3] - b[2])

    def mesh(self):
        X1, X2 = np.meshgrid(self.x1, self.x2, indexing="ij")
        return X1.ravel(), X2.ravel()

    def edge_mask(self, edges):
        mask = np.zeros(self.shape, dtype=bool)
        for e in edges:
            if e == "x1min":
                mask[0, :] = True
            elif e == "x1max":
                mask[-1, :] = True
            elif e == "x2min":
                mask[:, 0] = True
            elif e == "x2max":
                mask[:, -1] = True
            else:
                raise ValueError(f"unknown edge {e!r}")
        return mask.ravel()

    def edge_weights(self, edges):
        """Trapezoid line weights (parameter-domain arclength) on chosen edges."""
        w = np.zeros(self.shape)
        for e in edges:
            if e == "x1min":
                w[0, :] += self._w2
            elif e == "x1max":
                w[-1, :] += self._w2
            elif e == "x2min":
                w[:, 0] += self._w1
            elif e == "x2max":
                w[:, -1] += self._w1
            else:
                raise ValueError(f"unknown edge {e!r}")
        return w.ravel()

    def grad(self, f):
        """Nodal field (N, ...) -> (N, ..., 2) of partial derivatives."""
        flat = f.reshape(self.size, -1)
        g1 = (self.D1 @ flat).reshape(f.shape)
        g2 = (self.D2 @ flat).reshape(f.shape)
        return np.stack([g1, g2], axis=-1)

    def grad_transpose(self, p1, p2):
        """Adjoint of grad: sum_j D_j^T p_j for nodal arrays p_j of equal shape."""
        shape = p1.shape
        out = self.D1T @ p1.reshape(self.size, -1) + self.D2T @ p2.reshape(self.size, -1)
        return out.reshape(shape)


@dataclass
class GridGeometry:
    """Midsurface geometry sampled consistently with the grid differences.

    Tangents are the finite differences of the nodal chart values, and the
    normal gradient is the finite difference of the resulting unit normals.
    The identity state therefore has exactly zero discrete strain.
    """

    y0: np.ndarray
    frame: object


def grid_geometry(patch, grid):
    X1, X2 = grid.mesh()
    y0 = patch.position(X1, X2)
    dy = grid.grad(y0)
    n = np.cross(dy[..., 0], dy[..., 1])
    n = n / np.linalg.norm(n, axis=-1, keepdims=True)
    dn = grid.grad(n)
    return GridGeometry(y0, frame_from_gradients(dy, dn, with_polar=False))
