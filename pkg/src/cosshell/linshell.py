"""Linearized shell model and coefficient comparisons with other shell models."""

from dataclasses import dataclass

import numpy as np

from .assemble import EnergyBreakdown, ShellState
from .grid import grid_geometry
from .rotalg import anti, exp_so3, frob2, skew, sym, trace
from .shellcore import (_pad, curvature_weights, hom_form, membrane_weights, w_mp_hom,
                        w_shell)

_EYE = np.eye(3)


class NotFlat(ValueError):
    pass


@dataclass
class LinearState:
    """Midsurface displacement v (n1, n2, 3) and rotation vector theta (n1, n2, 3)."""

    v: np.ndarray
    theta: np.ndarray


def lin_strain(grad_v, theta, frame, grad_y=None):
    """(grad v - anti(theta) grad y0 | 0) [Grad Theta(0)]^-1."""
    gy = frame.grad_y if grad_y is None else grad_y
    return _pad(grad_v - anti(theta) @ gy) @ frame.grad_theta0_inv


def lin_bendcurv(grad_theta, frame):
    return _pad(grad_theta) @ frame.grad_theta0_inv


def lin_energy(state, grid, patch, mat, h=1.0, geom=None):
    """h * integral of [W_mp_hom(E_lin) + W_curv_hom(K_lin)] det(grad y0 | n0)."""
    geom = grid_geometry(patch, grid) if geom is None else geom
    fr = geom.frame
    v = state.v.reshape(-1, 3)
    th = state.theta.reshape(-1, 3)
    E = lin_strain(grid.grad(v), th, fr)
    K = lin_bendcurv(grid.grad(th), fr)
    w = h * grid.weights * fr.det_g
    return EnergyBreakdown(float(np.sum(w * hom_form(E, fr, membrane_weights(mat)))),
                           float(np.sum(w * hom_form(K, fr, curvature_weights(mat)))), 0.0)


def perturbed_state(state0_m, lin, eps):
    """Nonlinear state m = y0 + eps v, Q = exp(anti(eps theta))."""
    return ShellState(state0_m + eps * lin.v, exp_so3(eps * lin.theta))


@dataclass(frozen=True)
class SixParamCoeffs:
    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float
    beta1: float
    beta2: float
    beta3: float
    beta4: float
    mu_c_drill: float


def identify_6param(mat, h):
    mu, lam, mc = mat.mu, mat.lam, mat.mu_c
    b1, b2, b3 = mat.b1, mat.b2, mat.b3
    c = mat.curv_scale
    return SixParamCoeffs(
        alpha1=h * 2.0 * mu * lam / (2.0 * mu + lam),
        alpha2=h * (mu - mc),
        alpha3=h * (mu + mc),
        alpha4=h * 2.0 * mu * mc / (mu + mc),
        beta1=2.0 * c * b1 * b3 / (b1 + b3),
        beta2=c * b1,
        beta3=c * (b1 + b2),
        beta4=4.0 * c * b1 * b2 / (b1 + b2),
        mu_c_drill=2.0 * h * mc,
    )


def six_param_membrane(E, frame, coeffs, shear_factor=1.0):
    """(a2 + a3)|sym E_par|^2 + (a3 - a2)|skew E_par|^2 + a1 tr^2 + f a4 |E^T n0|^2.

    With shear_factor = 1 this is the quadratic form as identified; the
    factor 2 variant is what matches 2 h W_mp_hom in the shear block.
    """
    Ep = frame.A @ E
    r = np.einsum("...ij,...i->...j", E, frame.normal)
    c = coeffs
    return ((c.alpha2 + c.alpha3) * frob2(sym(Ep)) + (c.alpha3 - c.alpha2) * frob2(skew(Ep))
            + c.alpha1 * trace(Ep) ** 2 + shear_factor * c.alpha4 * np.sum(r * r, -1))


def six_param_curvature(K, frame, coeffs):
    """beta form on the same split: (b2 + b3)|sym|^2 + (b3 - b2)|skew|^2 + b1 tr^2 + b4 |K^T n0|^2."""
    Kp = frame.A @ K
    r = np.einsum("...ij,...i->...j", K, frame.normal)
    c = coeffs
    return ((c.beta2 + c.beta3) * frob2(sym(Kp)) + (c.beta3 - c.beta2) * frob2(skew(Kp))
            + c.beta1 * trace(Kp) ** 2 + c.beta4 * np.sum(r * r, -1))


def flat_shell_density(grad_m, R, mat):
    """Flat-plate membrane density in terms of the 2x2 block of (R1 | R2)^T grad m."""
    R12 = R[..., :, :2]
    X = np.swapaxes(R12, -1, -2) @ grad_m - np.eye(2)
    t = mat.lam * mat.mu / (mat.lam + 2.0 * mat.mu)
    shear = 2.0 * mat.mu * mat.mu_c / (mat.mu + mat.mu_c)
    r3 = np.einsum("...i,...ij->...j", R[..., :, 2], grad_m)
    return (mat.mu * frob2(sym(X)) + mat.mu_c * frob2(skew(X)) + t * trace(X) ** 2
            + shear * np.sum(r3 * r3, -1))


def flat_shell_energy(state, grid, patch, mat):
    """Integral of flat_shell_density; rejects curved patches."""
    if patch.kind != "plate":
        raise NotFlat(f"flat-shell reduction needs a plate, got {patch.kind}")
    gm = grid.grad(state.m_flat)
    return float(np.sum(grid.weights * flat_shell_density(gm, state.Q_flat, mat)))


def harmonic_mean(a, b):
    return 2.0 * a * b / (a + b)


def reissner_mindlin_check(mat, h=1.0, shear_correction=5.0 / 6.0, alpha1=None, alpha3=None):
    """Coefficient-by-coefficient comparison of the flat linearized membrane
    model (drill suppressed) with the reference plate model.

    alpha1, alpha3 are the reference curvature constants; by default they are
    the values matching this model's b1, b3 (alpha1 = 2 b1, alpha3 = 4 b3).
    Returns a list of rows (term, ours, reference, match).
    """
    mu, lam, mc = mat.mu, mat.lam, mat.mu_c
    a1 = 2.0 * mat.b1 if alpha1 is None else float(alpha1)
    a3 = 4.0 * mat.b3 if alpha3 is None else float(alpha3)
    wm = membrane_weights(mat)
    wc = curvature_weights(mat)
    scale = mat.curv_scale
    rows = [
        ("membrane sym weight", wm.s, mu),
        ("membrane trace weight", wm.t, mu * lam / (2.0 * mu + lam)),
        ("trace weight = H(mu, lambda/2)/2", wm.t, 0.5 * harmonic_mean(mu, 0.5 * lam)),
        ("transverse shear weight", wm.p, 2.0 * mu * mc / (mu + mc)),
        ("shear weight = H(mu, mu_c)", wm.p, harmonic_mean(mu, mc)),
        ("curvature sym weight / (mu Lc^2)", wc.s / scale, 0.5 * a1),
        ("curvature trace weight / (mu Lc^2)", 2.0 * wc.t / scale,
         a1 * a3 / (2.0 * a1 + a3)),
        ("curvature trace = H(a1, a3/2)/2", 2.0 * wc.t / scale,
         0.5 * harmonic_mean(a1, 0.5 * a3)),
    ]
    out = [(name, float(x), float(y), bool(np.isclose(x, y, rtol=1e-12, atol=0.0)))
           for name, x, y in rows]
    # the shear correction that makes a kappa mu / 2 shear term coincide
    kappa_eq = 4.0 * mc / (mu + mc)
    out.append(("equivalent shear correction 4 mu_c/(mu + mu_c)", kappa_eq,
                float(shear_correction), bool(np.isclose(kappa_eq, shear_correction))))
    out.append(("h^3 bending block", float("nan"), h ** 3 / 12.0, None))
    return out


def birsan_w_coss(X, Y, frame, mat):
    """Bilinear form W_shell(X_par, Y_par) + 2 mu mu_c/(mu + mu_c) <X_perp, Y_perp>."""
    A = frame.A
    Xp, Yp = A @ X, A @ Y
    Xn, Yn = X - Xp, Y - Yp
    t = mat.lam * mat.mu / (mat.lam + 2.0 * mat.mu)
    bil = (mat.mu * np.sum(sym(Xp) * sym(Yp), (-2, -1))
           + mat.mu_c * np.sum(skew(Xp) * skew(Yp), (-2, -1))
           + t * trace(X) * trace(Y))
    return bil + 2.0 * mat.mu * mat.mu_c / (mat.mu + mat.mu_c) * np.sum(Xn * Yn, (-2, -1))


def birsan_identity_check(mat, samples, frame, tol=1e-12):
    """True iff W_mp_hom(X) = W_Coss(X, X) on every sample."""
    X = np.asarray(samples, dtype=float)
    a = w_mp_hom(X, frame, mat)
    b = birsan_w_coss(X, X, frame, mat)
    return bool(np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.abs(a)))), a, b


def shell_from_parallel(X, frame, mat):
    return w_shell(frame.A @ X, mat)
