"""Parent three-dimensional Cosserat energy on the unit-thickness domain."""

import warnings
from dataclasses import dataclass

import numpy as np

from .rotalg import axl_skew, dev, frob2, orthogonality_defect, skew, skew_defect, sym, trace

_EYE = np.eye(3)


class GridTooCoarse(ValueError):
    pass


class NegativeWeight(UserWarning):
    pass


@dataclass(frozen=True)
class MaterialParams:
    """Isotropic Cosserat constants.

    debug_b3 replaces the derived b3 in the b-form only; it exists to build
    negative controls for the verification suite.
    """

    mu: float = 1.0
    lam: float = 1.0
    mu_c: float = 1.0
    L_c: float = 1.0
    a1: float = 1.0
    a2: float = 1.0
    a3: float = 1.0
    debug_b3: float | None = None

    def __post_init__(self):
        for name in ("mu", "lam", "mu_c", "L_c", "a1", "a2", "a3"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
        checks = [
            (self.mu > 0, "mu > 0"),
            (self.kappa_bulk > 0, "2 mu + 3 lambda > 0"),
            (self.mu_c > 0, "mu_c > 0"),
            (self.L_c > 0, "L_c > 0"),
            (self.a1 > 0 and self.a2 > 0 and self.a3 > 0, "a1, a2, a3 > 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(f"material invariant violated: {msg}")
        if self.b3 <= 0:
            warnings.warn("b3 = (12 a3 - a1)/3 is not positive", NegativeWeight)

    @property
    def kappa_bulk(self):
        return (2.0 * self.mu + 3.0 * self.lam) / 3.0

    @property
    def b1(self):
        return self.a1

    @property
    def b2(self):
        return self.a2

    @property
    def b3(self):
        if self.debug_b3 is not None:
            return self.debug_b3
        return (12.0 * self.a3 - self.a1) / 3.0

    @property
    def curv_scale(self):
        return self.mu * self.L_c ** 2


def w_mp(U, mat):
    """mu |dev sym X|^2 + mu_c |skew X|^2 + kappa/2 tr(X)^2 with X = U - I."""
    X = np.asarray(U, dtype=float) - _EYE
    S = sym(X)
    return (mat.mu * frob2(dev(S)) + mat.mu_c * frob2(skew(X))
            + 0.5 * mat.kappa_bulk * trace(S) ** 2)


def w_mp_lame(U, mat):
    """Same energy written with mu, mu_c and lambda/2."""
    X = np.asarray(U, dtype=float) - _EYE
    return (mat.mu * frob2(sym(X)) + mat.mu_c * frob2(skew(X))
            + 0.5 * mat.lam * trace(X) ** 2)


def w_curv_tilde(G, mat):
    """mu Lc^2 (a1 |dev sym G|^2 + a2 |skew G|^2 + 4 a3 tr(G)^2)."""
    G = np.asarray(G, dtype=float)
    return mat.curv_scale * (mat.a1 * frob2(dev(sym(G))) + mat.a2 * frob2(skew(G))
                             + 4.0 * mat.a3 * trace(G) ** 2)


def w_curv_bform(G, mat):
    """mu Lc^2 (b1 |sym G|^2 + b2 |skew G|^2 + b3 tr(G)^2)."""
    G = np.asarray(G, dtype=float)
    return mat.curv_scale * (mat.b1 * frob2(sym(G)) + mat.b2 * frob2(skew(G))
                             + mat.b3 * trace(G) ** 2)


def _sym_basis():
    basis = []
    for i in range(3):
        E = np.zeros((3, 3))
        E[i, i] = 1.0
        basis.append(E)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        E = np.zeros((3, 3))
        E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
        basis.append(E)
    return np.array(basis)


def _form_matrix(quad, basis):
    """Gram matrix of a quadratic form on the span of an orthonormal basis."""
    n = len(basis)
    M = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            M[i, j] = 0.5 * (quad(basis[i] + basis[j]) - quad(basis[i]) - quad(basis[j]))
    return M


def sym_form_bounds(mat, kind="mp"):
    """Extreme eigenvalues (c, C) of the energy restricted to Sym(3)."""
    if kind == "mp":
        def quad(S):
            return w_mp(_EYE + S, mat)
    else:
        def quad(S):
            return w_curv_tilde(S, mat)
    ev = np.linalg.eigvalsh(_form_matrix(quad, _sym_basis()))
    return float(ev[0]), float(ev[-1])


def coercivity_margin(X, mat, kind="mp"):
    """Sandwich (lower, value, upper) of the energy at strain X.

    kind="mp" treats X as U - I; kind="curv" treats X as a wryness tensor.
    The skew weight is mu_c for the membrane form and mu Lc^2 a2 for curvature.
    """
    X = np.asarray(X, dtype=float)
    c, C = sym_form_bounds(mat, kind)
    if kind == "mp":
        value = w_mp(_EYE + X, mat)
        sk = mat.mu_c
    else:
        value = w_curv_tilde(X, mat)
        sk = mat.curv_scale * mat.a2
    s2, k2 = frob2(sym(X)), frob2(skew(X))
    lower = c * s2 + sk * k2
    upper = C * s2 + sk * k2
    slack = 1e-12 * np.maximum(1.0, np.abs(value))
    assert np.all(lower <= value + slack) and np.all(value <= upper + slack)
    return lower, value, upper


# ---------------------------------------------------------------------------
# sampled 3D fields on the scaled domain

def gauss_thickness(n3):
    """Gauss-Legendre nodes and weights on [-1/2, 1/2]."""
    x, w = np.polynomial.legendre.leggauss(n3)
    return 0.5 * x, 0.5 * w


def lagrange_diff_matrix(nodes):
    """Differentiation matrix of the interpolating polynomial (barycentric form)."""
    x = np.asarray(nodes, dtype=float)
    n = len(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    c = np.prod(diff, axis=1)
    D = (c[:, None] / c[None, :]) / diff
    np.fill_diagonal(D, 0.0)
    D[np.diag_indices(n)] = -D.sum(axis=1)
    return D


@dataclass
class ThickFields:
    """phi (N, n3, 3) and Q (N, n3, 3, 3) on the in-plane grid times eta3 nodes."""

    phi: np.ndarray
    Q: np.ndarray
    eta3: np.ndarray
    eta3_weights: np.ndarray
    h: float

    def __post_init__(self):
        if orthogonality_defect(self.Q) > 1e-10:
            raise ValueError("rotation samples are not orthogonal")
        if np.any(np.linalg.det(self.Q) <= 0):
            raise ValueError("rotation samples must be proper")


def _thick_gradients(fields, grid):
    """In-plane FD and through-thickness spectral derivatives.

    Returns (dphi (N, n3, 3, 3) with columns d1, d2, d3, dQ list of 3 arrays).
    """
    N, n3 = fields.phi.shape[:2]
    D3 = lagrange_diff_matrix(fields.eta3)
    g_phi = grid.grad(fields.phi)  # (N, n3, 3, 2)
    d3_phi = np.einsum("kl,nlc->nkc", D3, fields.phi)
    dphi = np.concatenate([g_phi, d3_phi[..., None]], axis=-1)
    g_Q = grid.grad(fields.Q)  # (N, n3, 3, 3, 2)
    d3_Q = np.einsum("kl,nlab->nkab", D3, fields.Q)
    return dphi, [g_Q[..., 0], g_Q[..., 1], d3_Q]


def _geometry_at(geom, x3):
    """Grad Theta(x3) and its determinant for each node and thickness level."""
    fr = geom.frame
    zcol = np.zeros(fr.grad_n.shape[:-1] + (1,))
    dn = np.concatenate([fr.grad_n, zcol], -1)
    Gt = fr.grad_theta0[:, None] + x3[None, :, None, None] * dn[:, None]
    return Gt, np.linalg.det(Gt)


def wryness_field(fields, grid, geom, tol=0.1):
    """Gamma = (axl(Q^T d1 Q) | axl(Q^T d2 Q) | axl(Q^T d3 Q)/h) [Grad Theta]^-1."""
    _, dQ = _thick_gradients(fields, grid)
    Gt, _ = _geometry_at(geom, fields.h * fields.eta3)
    return _wryness(fields.Q, dQ, fields.h, Gt, tol)


def _wryness(Q, dQ, h, Gt, tol):
    QT = np.swapaxes(Q, -1, -2)
    cols = []
    for i, d in enumerate(dQ):
        M = QT @ d
        if np.any(skew_defect(M, tol)):
            raise GridTooCoarse(f"skew-projection residual {np.max(np.abs(sym(M))):.3e} in direction {i + 1}")
        k = axl_skew(M)
        cols.append(k / h if i == 2 else k)
    Ge = np.stack(cols, axis=-1)
    return Ge @ np.linalg.inv(Gt)


def biot_stretch(fields, grid, geom):
    dphi, _ = _thick_gradients(fields, grid)
    dphi = dphi.copy()
    dphi[..., 2] /= fields.h
    Gt, _ = _geometry_at(geom, fields.h * fields.eta3)
    return np.swapaxes(fields.Q, -1, -2) @ dphi @ np.linalg.inv(Gt)


def scaled_energy(fields, grid, geom, mat, tol=0.1, return_parts=False):
    """(1/h) J_h on the unit-thickness domain by nodal in-plane quadrature.

    The thickness direction uses the quadrature weights stored in `fields`.
    """
    dphi, dQ = _thick_gradients(fields, grid)
    dphi = dphi.copy()
    dphi[..., 2] /= fields.h
    Gt, detG = _geometry_at(geom, fields.h * fields.eta3)
    if np.any(detG <= 0):
        raise ValueError("grad Theta is not invertible on the thickness range")
    Gti = np.linalg.inv(Gt)
    U = np.swapaxes(fields.Q, -1, -2) @ dphi @ Gti
    Gam = _wryness(fields.Q, dQ, fields.h, Gt, tol)
    w = grid.weights[:, None] * fields.eta3_weights[None, :] * detG
    memb = float(np.sum(w * w_mp(U, mat)))
    curv = float(np.sum(w * w_curv_tilde(Gam, mat)))
    if return_parts:
        return memb, curv
    return memb + curv


def dislocation_density(Q, dQ):
    """Q^T Curl Q with row-wise curl; dQ[j] is the partial along x_{j+1}."""
    # (Curl Q)_{ij} = eps_{jkl} d_k Q_{il}
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    dstack = np.stack(dQ, axis=-1)  # (..., i, l, k)
    curl = np.einsum("jkl,...ilk->...ij", eps, dstack)
    return np.swapaxes(Q, -1, -2) @ curl
