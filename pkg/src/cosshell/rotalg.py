"""Small-matrix kernels: skew algebra, SO(3) exponential, polar split, Nye maps.

All functions broadcast over leading axes, so a stack of matrices with shape
(..., 3, 3) or vectors with shape (..., 3) is processed in one call.
"""

import numpy as np

TOL_ALGEBRAIC = 1e-12
TOL_DECOMP = 1e-10

_SMALL_ANGLE = 1e-4
_EYE = np.eye(3)


class NonSkew(ValueError):
    pass


class NonInvertible(ValueError):
    pass


def sym(X):
    return 0.5 * (X + np.swapaxes(X, -1, -2))


def skew(X):
    return 0.5 * (X - np.swapaxes(X, -1, -2))


def trace(X):
    return np.trace(X, axis1=-2, axis2=-1)


def dev(X):
    return X - trace(X)[..., None, None] / 3.0 * _EYE


def frob2(X):
    """Squared Frobenius norm over the last two axes."""
    return np.sum(X * X, axis=(-2, -1))


def inner(X, Y):
    return np.sum(X * Y, axis=(-2, -1))


def anti(v):
    """Map an axial vector to its skew matrix, anti(v) w = v x w."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def axl_skew(X):
    """Axial vector of skew(X); no skewness check."""
    X = np.asarray(X, dtype=float)
    return 0.5 * np.stack(
        [X[..., 2, 1] - X[..., 1, 2],
         X[..., 0, 2] - X[..., 2, 0],
         X[..., 1, 0] - X[..., 0, 1]],
        axis=-1,
    )


def axl(A, tol=None):
    """Axial vector of a skew-symmetric matrix.

    Raises NonSkew when the symmetric part exceeds tol relative to max(1, |A|).
    """
    A = np.asarray(A, dtype=float)
    tol = TOL_ALGEBRAIC if tol is None else tol
    scale = np.maximum(1.0, np.sqrt(frob2(A)))
    resid = np.sqrt(frob2(sym(A)))
    if np.any(resid > tol * scale):
        raise NonSkew(f"input is not skew-symmetric (residual {np.max(resid):.3e})")
    return np.stack([A[..., 2, 1], A[..., 0, 2], A[..., 1, 0]], axis=-1)


def exp_so3(w):
    """Rotation exp(anti(w)) for axial vectors w of shape (..., 3).

    Inputs are always read as vectors, so a stack of three vectors is never
    mistaken for a matrix; use exp_skew for skew-matrix input.
    """
    w = np.asarray(w, dtype=float)
    if w.shape[-1:] != (3,):
        raise ValueError("exp_so3 expects axial vectors of shape (..., 3)")
    theta2 = np.sum(w * w, axis=-1)
    theta = np.sqrt(theta2)
    small = theta < _SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    # sin(t)/t and (1 - cos t)/t^2 with Taylor branches near zero
    c1 = np.where(small, 1.0 - theta2 / 6.0 + theta2 ** 2 / 120.0, np.sin(safe) / safe)
    c2 = np.where(small, 0.5 - theta2 / 24.0 + theta2 ** 2 / 720.0,
                  (1.0 - np.cos(safe)) / safe ** 2)
    W = anti(w)
    return _EYE + c1[..., None, None] * W + c2[..., None, None] * (W @ W)


def exp_skew(A):
    """exp(A) for skew-symmetric A (checked)."""
    return exp_so3(axl(A))


def log_so3(Q):
    """Axial vector of the principal logarithm (angle < pi)."""
    Q = np.asarray(Q, dtype=float)
    c = np.clip(0.5 * (trace(Q) - 1.0), -1.0, 1.0)
    theta = np.arccos(c)
    v = axl_skew(Q)
    small = theta < _SMALL_ANGLE
    safe = np.where(small, 1.0, np.sin(theta))
    fac = np.where(small, 1.0 + theta ** 2 / 6.0, theta / safe)
    return fac[..., None] * v


def polar_decompose(F, tol=None):
    """Right polar decomposition F = Q U via scaled Newton iteration.

    Returns (Q, U) with Q proper orthogonal and U symmetric positive definite.
    """
    F = np.asarray(F, dtype=float)
    d = np.linalg.det(F)
    if np.any(d <= 0) or np.any(np.abs(d) < 1e-14):
        raise NonInvertible("polar decomposition needs det F > 0")
    tol = 1e-14 if tol is None else tol
    X = F.copy()
    for _ in range(100):
        Xinv = np.linalg.inv(X)
        # determinant scaling accelerates the early iterations
        zeta = np.abs(np.linalg.det(X)) ** (-1.0 / 3.0)
        Xn = 0.5 * (zeta[..., None, None] * X
                    + np.swapaxes(Xinv, -1, -2) / zeta[..., None, None])
        delta = np.max(np.sqrt(frob2(Xn - X)))
        X = Xn
        if delta < tol * max(1.0, float(np.max(np.sqrt(frob2(X))))):
            break
    Q = X
    U = sym(np.swapaxes(Q, -1, -2) @ F)
    return Q, U


def cartan_split(X):
    """Return (dev sym X, skew X, tr X) with X = dev sym + skew + tr/3 I."""
    X = np.asarray(X, dtype=float)
    return dev(sym(X)), skew(X), trace(X)


def nye_gamma_to_alpha(G):
    G = np.asarray(G, dtype=float)
    return -np.swapaxes(G, -1, -2) + trace(G)[..., None, None] * _EYE


def nye_alpha_to_gamma(a):
    a = np.asarray(a, dtype=float)
    return -np.swapaxes(a, -1, -2) + 0.5 * trace(a)[..., None, None] * _EYE


def orthogonality_defect(Q):
    """max |Q^T Q - I| over the stack."""
    Q = np.asarray(Q, dtype=float)
    return float(np.max(np.abs(np.swapaxes(Q, -1, -2) @ Q - _EYE)))


def reorthonormalize(Q):
    """Nearest rotation via SVD, used as a drift guard."""
    Q = np.asarray(Q, dtype=float)
    W, _, Vt = np.linalg.svd(Q.reshape(-1, 3, 3))
    neg = np.linalg.det(W @ Vt) < 0
    W[neg, :, -1] *= -1
    return (W @ Vt).reshape(Q.shape)


def skew_defect(M, tol=0.1):
    """True where sym(M) is not small against skew(M).

    M = Q^T dQ from differenced rotation samples. The reference magnitude is
    the larger of the local skew norm and its RMS over the stack, so points
    where the rotation field is stationary do not trigger on round-off sized
    symmetric parts.
    """
    rs = np.sqrt(frob2(sym(M)))
    rk = np.sqrt(frob2(skew(M)))
    ref = np.maximum(rk, np.sqrt(np.mean(rk * rk)))
    return rs > tol * ref + 1e-9
