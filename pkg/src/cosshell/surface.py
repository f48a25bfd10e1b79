"""Reference midsurface geometry: frames, fundamental forms, shell projectors."""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.interpolate import RectBivariateSpline

from .fdiff import diff_matrix
from .rotalg import polar_decompose

KINDS = ("plate", "cylinder", "sphere-cap", "graph", "tabulated")

_ALTERNATOR = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


class DegenerateSurface(ValueError):
    pass


@dataclass(frozen=True)
class MidsurfacePatch:
    """Chart y0 on the rectangle bounds = (x1min, x1max, x2min, x2max).

    `jet(x1, x2)` returns (y0, dy0, ddy0) with shapes (..., 3), (..., 3, 2)
    and (..., 3, 2, 2).
    """

    kind: str
    bounds: tuple
    params: dict = field(default_factory=dict)
    _jet: object = field(default=None, repr=False, compare=False)

    def jet(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        x1, x2 = np.broadcast_arrays(x1, x2)
        return self._jet(x1, x2)

    def position(self, x1, x2):
        return self.jet(x1, x2)[0]

    def jacobian(self, x1, x2):
        return self.jet(x1, x2)[1]


def _stack_cols(c1, c2):
    return np.stack([c1, c2], axis=-1)


def plate(bounds=(0.0, 1.0, 0.0, 1.0)):
    def jet(x1, x2):
        z = np.zeros_like(x1)
        y = np.stack([x1, x2, z], axis=-1)
        one = np.ones_like(x1)
        dy = _stack_cols(np.stack([one, z, z], -1), np.stack([z, one, z], -1))
        ddy = np.zeros(x1.shape + (3, 2, 2))
        return y, dy, ddy
    return MidsurfacePatch("plate", tuple(map(float, bounds)), {}, jet)


def cylinder(radius=1.0, bounds=(0.0, 1.0, 0.0, 1.0)):
    R = float(radius)
    if R <= 0:
        raise DegenerateSurface("cylinder radius must be positive")

    def jet(x1, x2):
        c, s = np.cos(x1), np.sin(x1)
        z = np.zeros_like(x1)
        one = np.ones_like(x1)
        y = np.stack([R * c, R * s, x2], -1)
        dy = _stack_cols(np.stack([-R * s, R * c, z], -1), np.stack([z, z, one], -1))
        ddy = np.zeros(x1.shape + (3, 2, 2))
        ddy[..., 0, 0, 0] = -R * c
        ddy[..., 1, 0, 0] = -R * s
        return y, dy, ddy
    return MidsurfacePatch("cylinder", tuple(map(float, bounds)), {"radius": R}, jet)


def _graph_jet(g, gx, gy, gxx, gxy, gyy):
    def jet(x1, x2):
        z = np.zeros_like(x1)
        one = np.ones_like(x1)
        y = np.stack([x1, x2, g(x1, x2)], -1)
        dy = _stack_cols(np.stack([one, z, gx(x1, x2)], -1),
                         np.stack([z, one, gy(x1, x2)], -1))
        ddy = np.zeros(x1.shape + (3, 2, 2))
        ddy[..., 2, 0, 0] = gxx(x1, x2)
        ddy[..., 2, 0, 1] = ddy[..., 2, 1, 0] = gxy(x1, x2)
        ddy[..., 2, 1, 1] = gyy(x1, x2)
        return y, dy, ddy
    return jet


def sphere_cap(radius=1.0, bounds=(-0.5, 0.5, -0.5, 0.5)):
    """Upper hemisphere of radius R written as a graph over the x1-x2 plane."""
    R = float(radius)
    b = tuple(map(float, bounds))
    corner = max(abs(b[0]), abs(b[1])) ** 2 + max(abs(b[2]), abs(b[3])) ** 2
    if R <= 0 or corner >= R * R:
        raise DegenerateSurface("sphere cap chart must stay inside the equator")

    def r(x, y):
        return np.sqrt(R * R - x * x - y * y)

    jet = _graph_jet(
        r,
        lambda x, y: -x / r(x, y),
        lambda x, y: -y / r(x, y),
        lambda x, y: -(R * R - y * y) / r(x, y) ** 3,
        lambda x, y: -x * y / r(x, y) ** 3,
        lambda x, y: -(R * R - x * x) / r(x, y) ** 3,
    )
    return MidsurfacePatch("sphere-cap", b, {"radius": R}, jet)


def graph(coeffs, bounds=(0.0, 1.0, 0.0, 1.0)):
    """Polynomial graph z = sum c[i, j] x1^i x2^j."""
    c = np.atleast_2d(np.asarray(coeffs, dtype=float))
    cx, cy = P.polyder(c, axis=0), P.polyder(c, axis=1)
    cxx, cxy, cyy = P.polyder(cx, axis=0), P.polyder(cx, axis=1), P.polyder(cy, axis=1)

    def ev(cc):
        return lambda x, y: P.polyval2d(x, y, cc)

    jet = _graph_jet(ev(c), ev(cx), ev(cy), ev(cxx), ev(cxy), ev(cyy))
    return MidsurfacePatch("graph", tuple(map(float, bounds)),
                           {"coeffs": c.tolist()}, jet)


def read_tabulated(path):
    """Parse a grid file: header `nx ny x1min x1max x2min x2max`, then rows."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6:
            raise ValueError("tabulated header must have 6 fields")
        nx, ny = int(header[0]), int(header[1])
        bounds = tuple(float(v) for v in header[2:])
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (nx * ny, 3):
        raise ValueError(f"expected {nx * ny} rows of 3 values, got {data.shape}")
    return data.reshape(nx, ny, 3), bounds


def write_tabulated(path, samples, bounds):
    nx, ny, _ = samples.shape
    with open(path, "w") as fh:
        fh.write(f"{nx} {ny} " + " ".join(repr(float(b)) for b in bounds) + "\n")
        np.savetxt(fh, samples.reshape(-1, 3), fmt="%.17g")


def tabulated(samples, bounds, source=None):
    """Patch from nodal samples (nx, ny, 3) on a uniform lattice.

    Nodal first and second derivatives come from fourth-order differences;
    values between nodes are bicubic spline interpolants of those arrays.
    """
    Y = np.asarray(samples, dtype=float)
    nx, ny, _ = Y.shape
    b = tuple(map(float, bounds))
    x = np.linspace(b[0], b[1], nx)
    yv = np.linspace(b[2], b[3], ny)
    D1 = diff_matrix(nx, x[1] - x[0], 1, 4).toarray()
    D2 = diff_matrix(ny, yv[1] - yv[0], 1, 4).toarray()
    DD1 = diff_matrix(nx, x[1] - x[0], 2, 4).toarray()
    DD2 = diff_matrix(ny, yv[1] - yv[0], 2, 4).toarray()
    d1 = np.einsum("ik,kjc->ijc", D1, Y)
    d2 = np.einsum("jk,ikc->ijc", D2, Y)
    d11 = np.einsum("ik,kjc->ijc", DD1, Y)
    d22 = np.einsum("jk,ikc->ijc", DD2, Y)
    d12 = np.einsum("jk,ikc->ijc", D2, d1)
    fields = [Y, d1, d2, d11, d12, d22]
    splines = [[RectBivariateSpline(x, yv, f[..., c], kx=3, ky=3) for c in range(3)]
               for f in fields]

    def jet(x1, x2):
        def ev(k):
            return np.stack([s.ev(x1, x2) for s in splines[k]], -1)
        y = ev(0)
        dy = _stack_cols(ev(1), ev(2))
        ddy = np.zeros(x1.shape + (3, 2, 2))
        ddy[..., 0, 0] = ev(3)
        ddy[..., 0, 1] = ddy[..., 1, 0] = ev(4)
        ddy[..., 1, 1] = ev(5)
        return y, dy, ddy
    params = {"file": str(source)} if source is not None else {}
    return MidsurfacePatch("tabulated", b, params, jet)


def tabulated_from_file(path):
    Y, bounds = read_tabulated(path)
    return tabulated(Y, bounds, source=path)


@dataclass(frozen=True)
class SurfaceFrame:
    """Pointwise (or stacked) differential geometry of the midsurface."""

    grad_y: np.ndarray
    normal: np.ndarray
    grad_n: np.ndarray
    grad_theta0: np.ndarray
    grad_theta0_inv: np.ndarray
    Q0: np.ndarray
    U0: np.ndarray
    det_g: np.ndarray
    first_ff: np.ndarray
    second_ff: np.ndarray
    weingarten: np.ndarray
    H: np.ndarray
    K: np.ndarray
    kappa: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray


def frame_from_gradients(grad_y, grad_n, with_polar=True):
    """Build a SurfaceFrame from dy0 (..., 3, 2) and dn0 (..., 3, 2)."""
    grad_y = np.asarray(grad_y, dtype=float)
    grad_n = np.asarray(grad_n, dtype=float)
    c = np.cross(grad_y[..., 0], grad_y[..., 1])
    cn = np.linalg.norm(c, axis=-1)
    if np.any(cn < 1e-12):
        raise DegenerateSurface("tangent vectors are (nearly) parallel")
    n = c / cn[..., None]
    G = np.concatenate([grad_y, n[..., None]], axis=-1)
    Ginv = np.linalg.inv(G)
    detG = np.linalg.det(G)
    yT = np.swapaxes(grad_y, -1, -2)
    I_ff = yT @ grad_y
    II_ff = -yT @ grad_n
    II_ff = 0.5 * (II_ff + np.swapaxes(II_ff, -1, -2))
    L = np.linalg.solve(I_ff, II_ff)
    H = 0.5 * np.trace(L, axis1=-2, axis2=-1)
    K = np.linalg.det(L)
    # L is self-adjoint for the first fundamental form, so the symmetric
    # similarity transform gives well-conditioned eigenvalues at umbilics
    Lc = np.linalg.cholesky(I_ff)
    Li = np.linalg.inv(Lc)
    M = Li @ II_ff @ np.swapaxes(Li, -1, -2)
    kappa = np.linalg.eigvalsh(0.5 * (M + np.swapaxes(M, -1, -2)))
    zcol = np.zeros(grad_y.shape[:-1] + (1,))
    A = np.concatenate([grad_y, zcol], -1) @ Ginv
    B = -np.concatenate([grad_n, zcol], -1) @ Ginv
    C = detG[..., None, None] * np.swapaxes(Ginv, -1, -2) @ _ALTERNATOR @ Ginv
    if with_polar:
        Q0, U0 = polar_decompose(G)
    else:
        Q0 = U0 = None
    return SurfaceFrame(grad_y, n, grad_n, G, Ginv, Q0, U0, detG, I_ff, II_ff,
                        L, H, K, kappa, A, B, C)


def normal_gradient(dy, ddy):
    """Analytic dn0 (..., 3, 2) from first and second chart derivatives."""
    c = np.cross(dy[..., 0], dy[..., 1])
    cn = np.linalg.norm(c, axis=-1)[..., None]
    n = c / cn
    cols = []
    for j in range(2):
        dc = np.cross(ddy[..., :, 0, j], dy[..., 1]) + np.cross(dy[..., 0], ddy[..., :, 1, j])
        cols.append((dc - n * np.sum(n * dc, -1, keepdims=True)) / cn)
    return np.stack(cols, axis=-1)


def frame_at(patch, x1, x2):
    _, dy, ddy = patch.jet(x1, x2)
    return frame_from_gradients(dy, normal_gradient(dy, ddy))


def grad_theta(frame, x3, grad_n=None):
    """(dy0 | n0) + x3 (dn0 | 0)."""
    dn = frame.grad_n if grad_n is None else grad_n
    x3 = np.asarray(x3, dtype=float)
    zcol = np.zeros(dn.shape[:-1] + (1,))
    return frame.grad_theta0 + x3[..., None, None] * np.concatenate([dn, zcol], -1)


def det_grad_theta(frame, x3):
    return frame.det_g * (1.0 - 2.0 * frame.H * x3 + frame.K * x3 * x3)


def projectors(frame):
    return frame.A, frame.B, frame.C


def sample_grid(patch, n1, n2):
    b = patch.bounds
    x1 = np.linspace(b[0], b[1], n1)
    x2 = np.linspace(b[2], b[3], n2)
    return np.meshgrid(x1, x2, indexing="ij")


def max_abs_curvature(patch, samples=(33, 33)):
    X1, X2 = sample_grid(patch, *samples)
    fr = frame_at(patch, X1, X2)
    return float(np.max(np.abs(fr.kappa)))


def thickness_admissible(patch, h, samples=(33, 33)):
    """h * max |kappa_i| < 2 over the sample lattice."""
    if h <= 0:
        raise ValueError("thickness must be positive")
    return bool(h * max_abs_curvature(patch, samples) < 2.0)
