"""Independent reference computations used to check the closed forms.

None of these reuse the code paths they check: infima come from derivative-free
search, the exponential from its power series, the polar factor from an SVD,
and curvatures from finite differences of chart positions.
"""

import numpy as np
from scipy.optimize import minimize

from .cosserat3d import w_curv_tilde


def series_exp(A, terms=20):
    """Truncated matrix power series sum_k A^k / k!."""
    A = np.asarray(A, dtype=float)
    out = np.eye(3)
    term = np.eye(3)
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


def svd_polar(F):
    """Polar factors from F = W S V^T: Q = W V^T, U = V S V^T."""
    W, s, Vt = np.linalg.svd(F)
    return W @ Vt, (Vt.T * s) @ Vt


def _nelder_mead(f, x0, scale):
    res = minimize(f, x0, method="Nelder-Mead",
                   options={"xatol": 1e-10 * scale, "fatol": 1e-14,
                            "maxiter": 5000, "maxfev": 10000,
                            "initial_simplex": x0 + scale * np.vstack([np.zeros(3), np.eye(3)])})
    return res.fun, res.x


def brute_force_director(grad_m, Q, Ginv, mat, rng=None, starts=8):
    """min over c in R^3 of W_mp(Q^T (grad m | c) Ginv) by multistart Nelder-Mead.

    The objective is written out with the (mu, mu_c, lambda) coefficients on
    plain matrix invariants instead of calling the library energy.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    QT = Q.T
    B = QT @ np.column_stack([grad_m, np.zeros(3)]) @ Ginv - np.eye(3)
    row = Ginv[2]
    mu, mc, lam = mat.mu, mat.mu_c, mat.lam

    def f(c):
        X = B + np.outer(QT @ c, row)
        a = np.sum(X * X)
        b = np.sum(X * X.T)
        t = X[0, 0] + X[1, 1] + X[2, 2]
        return mu * 0.5 * (a + b) + mc * 0.5 * (a - b) + 0.5 * lam * t * t

    n_guess = Q @ row
    scale = 1.0 + np.linalg.norm(grad_m)
    x0s = [n_guess, -n_guess, 2.0 * n_guess, 0.5 * n_guess]
    while len(x0s) < starts:
        x0s.append(rng.normal(scale=scale, size=3))
    best = (np.inf, None)
    for x0 in x0s:
        val, x = _nelder_mead(f, np.asarray(x0, float), 0.5 * scale)
        if val < best[0]:
            best = (val, x)
    return best


def brute_force_rotation_rate(K, normal, mat, half_width=None, levels=36):
    """min over a in R^3 of W~curv(K + a (x) n0) by successive grid zooming.

    Each level evaluates a 9^3 lattice around the current best point and
    halves the box; the box always contains two lattice spacings around the
    incumbent, which is ample for these well-conditioned quadratics.
    """
    K = np.asarray(K, float)
    n = np.asarray(normal, float)
    r = 4.0 * (1.0 + np.sqrt(np.sum(K * K))) if half_width is None else half_width
    ticks = np.linspace(-1.0, 1.0, 9)
    offs = np.stack(np.meshgrid(ticks, ticks, ticks, indexing="ij"), -1).reshape(-1, 3)

    def f(a):
        a = np.atleast_2d(a)
        return w_curv_tilde(K + a[:, :, None] * n[None, None, :], mat)

    centre = np.zeros(3)
    best = float(f(centre)[0])
    for _ in range(levels):
        pts = centre + r * offs
        vals = f(pts)
        i = int(np.argmin(vals))
        if vals[i] <= best:
            centre, best = pts[i], float(vals[i])
        r *= 0.5
    return best, centre


def fd_fundamental_forms(patch, x1, x2, step=1e-5):
    """First and second fundamental forms from central differences of y0."""
    def y(a, b):
        return patch.position(a, b)

    e = step
    y1 = (y(x1 + e, x2) - y(x1 - e, x2)) / (2 * e)
    y2 = (y(x1, x2 + e) - y(x1, x2 - e)) / (2 * e)
    y0 = y(x1, x2)
    y11 = (y(x1 + e, x2) - 2 * y0 + y(x1 - e, x2)) / e ** 2
    y22 = (y(x1, x2 + e) - 2 * y0 + y(x1, x2 - e)) / e ** 2
    y12 = (y(x1 + e, x2 + e) - y(x1 + e, x2 - e) - y(x1 - e, x2 + e)
           + y(x1 - e, x2 - e)) / (4 * e * e)
    n = np.cross(y1, y2)
    n = n / np.linalg.norm(n)
    I = np.array([[y1 @ y1, y1 @ y2], [y2 @ y1, y2 @ y2]])
    # II = -grad y^T grad n = n . second derivatives
    II = np.array([[n @ y11, n @ y12], [n @ y12, n @ y22]])
    return I, II, n


def fd_curvatures(patch, x1, x2, step=1e-5):
    I, II, _ = fd_fundamental_forms(patch, x1, x2, step)
    L = np.linalg.solve(I, II)
    return 0.5 * np.trace(L), np.linalg.det(L), np.sort(np.linalg.eigvals(L).real)


def fd_normal_gradient(patch, x1, x2, step=1e-5):
    def n(a, b):
        dy = patch.jacobian(a, b)
        c = np.cross(dy[:, 0], dy[:, 1])
        return c / np.linalg.norm(c)
    e = step
    return np.column_stack([(n(x1 + e, x2) - n(x1 - e, x2)) / (2 * e),
                            (n(x1, x2 + e) - n(x1, x2 - e)) / (2 * e)])


def fd_gradient(f, X, step=1e-6):
    """Central-difference gradient of a scalar function of a matrix."""
    X = np.asarray(X, float)
    G = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        E = np.zeros_like(X)
        E[idx] = step
        G[idx] = (f(X + E) - f(X - E)) / (2 * step)
    return G
