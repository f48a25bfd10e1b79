"""Through-thickness reconstruction: optimal director, optimal rotation rate,
and the recovery fields used to measure the gap to the limit energy."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .cosserat3d import ThickFields, gauss_thickness, scaled_energy, w_curv_tilde
from .rotalg import anti, exp_so3, skew, sym, trace
from .shellcore import _pad, bend_columns, normal_row, strain_E

_EYE = np.eye(3)


class SingularSystem(ValueError):
    pass


@dataclass
class Reconstruction:
    d_star: np.ndarray
    a_star: np.ndarray

    @property
    def A_star(self):
        return anti(self.a_star)


def optimal_director(E, Q, frame, mat):
    """d* = (1 - lambda/(2 mu + lambda) tr E) Q n0 + (mu_c - mu)/(mu_c + mu) Q E^T n0."""
    n = frame.normal
    beta = mat.lam / (2.0 * mat.mu + mat.lam)
    gamma = (mat.mu_c - mat.mu) / (mat.mu_c + mat.mu)
    Qn = np.einsum("...ij,...j->...i", Q, n)
    QEn = np.einsum("...ij,...j->...i", Q, normal_row(E, frame))
    return (1.0 - beta * trace(E))[..., None] * Qn + gamma * QEn


def stretch_with_director(grad_m, c, Q, frame):
    """U(c) = Q^T (grad m | c) [Grad Theta(0)]^-1."""
    F = np.concatenate([grad_m, np.asarray(c, dtype=float)[..., :, None]], axis=-1)
    return np.swapaxes(Q, -1, -2) @ F @ frame.grad_theta0_inv


def biot_stress(U, mat):
    X = np.asarray(U, dtype=float) - _EYE
    return (2.0 * mat.mu * sym(X) + 2.0 * mat.mu_c * skew(X)
            + mat.lam * trace(X)[..., None, None] * _EYE)


def _curv_quadratic(K, frame, mat):
    """Gradient g and Hessian H of a -> W~curv(K + a (x) n0) at a = 0.

    The form is probed at 0, +-e_i and e_i + e_j; for a quadratic these
    differences are exact.
    """
    n = frame.normal
    f0 = w_curv_tilde(K, mat)
    eye = np.eye(3)

    def f(a):
        return w_curv_tilde(K + a[..., :, None] * n[..., None, :], mat)

    batch = np.shape(f0)
    g = np.zeros(batch + (3,))
    H = np.zeros(batch + (3, 3))
    fp = []
    for i in range(3):
        e = np.broadcast_to(eye[i], batch + (3,))
        fpi, fmi = f(e), f(-e)
        fp.append(fpi)
        g[..., i] = 0.5 * (fpi - fmi)
        H[..., i, i] = fpi + fmi - 2.0 * f0
    for i in range(3):
        for j in range(i + 1, 3):
            e = np.broadcast_to(eye[i] + eye[j], batch + (3,))
            H[..., i, j] = H[..., j, i] = f(e) - fp[i] - fp[j] + f0
    return g, H


def optimal_rotation_rate(k1, k2, frame, mat):
    """Axial vector a* minimising W~curv((k1 | k2 | a) [Grad Theta(0)]^-1)."""
    K = _pad(np.stack([np.asarray(k1, float), np.asarray(k2, float)], -1)) @ frame.grad_theta0_inv
    g, H = _curv_quadratic(K, frame, mat)
    # (0|0|a) G^-1 = a (x) n0, so the probe variable is the third column itself
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("curvature normal system is not positive definite") from exc
    if L.ndim == 2:
        return -scipy.linalg.cho_solve((L, True), g)
    y = np.linalg.solve(L, -g[..., None])
    return np.linalg.solve(np.swapaxes(L, -1, -2), y)[..., 0]


def rotation_rate_operator(frame, mat):
    """Linear map (k1, k2) -> a* as a (..., 3, 6) matrix."""
    batch = frame.normal.shape[:-1]
    cols = []
    for j in range(6):
        k = np.zeros(batch + (6,))
        k[..., j] = 1.0
        cols.append(optimal_rotation_rate(k[..., :3], k[..., 3:], frame, mat))
    return np.stack(cols, axis=-1)


def reconstruct(grad_m, Q, dQ1, dQ2, frame, mat):
    E = strain_E(grad_m, Q, frame)
    k1, k2 = bend_columns(dQ1, dQ2, Q)
    return Reconstruction(optimal_director(E, Q, frame, mat),
                          optimal_rotation_rate(k1, k2, frame, mat))


def recovery_fields(h, state, grid, geom, mat, n3=5):
    """Affine-in-thickness fields phi = m + h eta3 d*, Q = Qbar exp(h eta3 A*)."""
    m = state.m_flat
    Q = state.Q_flat
    gm = grid.grad(m)
    gQ = grid.grad(Q)
    rec = reconstruct(gm, Q, gQ[..., 0], gQ[..., 1], geom.frame, mat)
    eta, w = gauss_thickness(n3)
    t = h * eta
    phi = m[:, None, :] + t[None, :, None] * rec.d_star[:, None, :]
    Qt = Q[:, None] @ exp_so3(t[None, :, None] * rec.a_star[:, None, :])
    return ThickFields(phi, Qt, eta, w, float(h))


def gamma_gap(h, state, grid, geom, mat, n3=5, j0=None):
    """(1/h) J_h(recovery fields) - J0(state), with J0 on the same grid."""
    from .assemble import limit_energy
    if j0 is None:
        j0 = limit_energy(state, grid, geom, mat)
    fields = recovery_fields(h, state, grid, geom, mat, n3)
    return scaled_energy(fields, grid, geom, mat) - j0
