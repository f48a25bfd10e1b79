"""Reduced shell strain measures and the homogenized energy densities."""

from dataclasses import dataclass

import numpy as np

from .rotalg import axl_skew, dev, frob2, skew, skew_defect, sym, trace

_EYE = np.eye(3)
STRUCT_TOL = 1e-8


class StructuralViolation(ValueError):
    pass


class NotATangentDerivative(ValueError):
    pass


def _pad(M2):
    """(..., 3, 2) -> (..., 3, 3) with a zero third column."""
    return np.concatenate([M2, np.zeros(M2.shape[:-1] + (1,))], axis=-1)


def strain_E(grad_m, Q, frame, grad_y=None):
    """(Q^T grad m - grad y0 | 0) [Grad Theta(0)]^-1."""
    gy = frame.grad_y if grad_y is None else grad_y
    X = np.swapaxes(Q, -1, -2) @ grad_m - gy
    return _pad(X) @ frame.grad_theta0_inv


def bend_columns(dQ1, dQ2, Q, tol=0.1):
    """axl(skew(Q^T d_i Q)) for i = 1, 2, with the tangency diagnostic."""
    QT = np.swapaxes(Q, -1, -2)
    cols = []
    for i, d in enumerate((dQ1, dQ2)):
        M = QT @ d
        if np.any(skew_defect(M, tol)):
            raise NotATangentDerivative(
                f"Q^T dQ is not skew in direction {i + 1} (residual {np.max(np.abs(sym(M))):.3e})")
        cols.append(axl_skew(M))
    return cols


def bendcurv_K(dQ1, dQ2, Q, frame, tol=0.1):
    """(axl(Q^T d1 Q) | axl(Q^T d2 Q) | 0) [Grad Theta(0)]^-1."""
    k1, k2 = bend_columns(dQ1, dQ2, Q, tol)
    return _pad(np.stack([k1, k2], axis=-1)) @ frame.grad_theta0_inv


def curvature_from_columns(k1, k2, frame):
    return _pad(np.stack([k1, k2], axis=-1)) @ frame.grad_theta0_inv


def split(X, frame):
    """(A X, (I - A) X)."""
    Xp = frame.A @ X
    return Xp, X - Xp


def normal_row(X, frame):
    """X^T n0, whose norm equals |X_perp| for structured X."""
    return np.einsum("...ij,...i->...j", X, frame.normal)


def check_structure(X, frame, tol=STRUCT_TOL):
    resid = np.sqrt(frob2(X - X @ frame.A))
    scale = np.sqrt(frob2(X))
    if np.any(resid > tol * scale):
        raise StructuralViolation("tensor is not of the form (*|*|0)[Grad Theta]^-1 "
                                  f"(residual {np.max(resid):.3e})")


def w_shell(X, mat):
    """mu |sym X|^2 + mu_c |skew X|^2 + lambda mu/(lambda + 2 mu) tr(X)^2."""
    X = np.asarray(X, dtype=float)
    t = mat.lam * mat.mu / (mat.lam + 2.0 * mat.mu)
    return mat.mu * frob2(sym(X)) + mat.mu_c * frob2(skew(X)) + t * trace(X) ** 2


def w_shell_dev(X, mat):
    """Same form written with the deviatoric part of sym X."""
    X = np.asarray(X, dtype=float)
    t = 2.0 * mat.mu * (2.0 * mat.lam + mat.mu) / (3.0 * (mat.lam + 2.0 * mat.mu))
    return mat.mu * frob2(dev(sym(X))) + mat.mu_c * frob2(skew(X)) + t * trace(X) ** 2


@dataclass(frozen=True)
class HomWeights:
    """Coefficients of a homogenized quadratic form of shell type.

    W(X) = s |sym X_par|^2 + k |skew X_par|^2 + t tr(X_par)^2 + p |X^T n0|^2.
    """

    s: float
    k: float
    t: float
    p: float


def membrane_weights(mat):
    mu, mc, lam = mat.mu, mat.mu_c, mat.lam
    return HomWeights(mu, mc, lam * mu / (lam + 2.0 * mu), 2.0 * mu * mc / (mu + mc))


def curvature_weights(mat):
    b1, b2, b3 = mat.b1, mat.b2, mat.b3
    c = mat.curv_scale
    return HomWeights(c * b1, c * b2, c * b1 * b3 / (b1 + b3), c * 2.0 * b1 * b2 / (b1 + b2))


def hom_form(X, frame, wts):
    Xp = frame.A @ X
    r = normal_row(X, frame)
    return (wts.s * frob2(sym(Xp)) + wts.k * frob2(skew(Xp))
            + wts.t * trace(Xp) ** 2 + wts.p * np.sum(r * r, axis=-1))


def hom_form_grad(X, frame, wts):
    """Derivative of hom_form with respect to the full matrix X."""
    Xp = frame.A @ X
    S = 2.0 * wts.s * sym(Xp) + 2.0 * wts.k * skew(Xp) \
        + 2.0 * wts.t * trace(Xp)[..., None, None] * _EYE
    r = normal_row(X, frame)
    return frame.A @ S + 2.0 * wts.p * frame.normal[..., :, None] * r[..., None, :]


def w_mp_hom(E, frame, mat, check=True):
    """W_shell(E_par) + 2 mu mu_c/(mu + mu_c) |E^T n0|^2."""
    E = np.asarray(E, dtype=float)
    if check:
        check_structure(E, frame)
    return hom_form(E, frame, membrane_weights(mat))


def w_curv_hom(K, frame, mat, check=True):
    """Homogenized curvature energy of a structured bending-curvature tensor."""
    K = np.asarray(K, dtype=float)
    if check:
        check_structure(K, frame)
    return hom_form(K, frame, curvature_weights(mat))


def density_J0(E, K, frame, mat):
    return (w_mp_hom(E, frame, mat) + w_curv_hom(K, frame, mat)) * frame.det_g


def w_mp_algebraic_mean(E, frame, mat):
    """Variant with the transverse-shear weight (mu + mu_c)/2 in place of the
    harmonic mean; used only for ordering comparisons."""
    w = membrane_weights(mat)
    return hom_form(E, frame, HomWeights(w.s, w.k, w.t, 0.5 * (mat.mu + mat.mu_c)))
