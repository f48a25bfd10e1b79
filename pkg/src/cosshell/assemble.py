"""Discrete limit functional on the node lattice: energy, gradient, minimizer."""

from dataclasses import dataclass, field

import numpy as np

from .grid import ShellGrid, grid_geometry
from .reconstruct import optimal_director, rotation_rate_operator
from .rotalg import (anti, axl_skew, exp_so3, orthogonality_defect, skew_defect,
                     reorthonormalize, sym)
from .shellcore import (NotATangentDerivative, _pad, curvature_weights, hom_form,
                        hom_form_grad, membrane_weights, normal_row)

__all__ = ["ShellGrid", "ShellState", "LoadSpec", "EnergyBreakdown", "ShellModel",
           "SolverOptions", "LineSearchFailed", "identity_state", "total_energy",
           "gradient", "load_potential", "minimize", "limit_energy"]

_EYE = np.eye(3)


class LineSearchFailed(RuntimeError):
    pass


@dataclass
class ShellState:
    """Nodal midsurface deformation m (n1, n2, 3) and rotation Q (n1, n2, 3, 3)."""

    m: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float)
        self.Q = np.asarray(self.Q, dtype=float)
        if self.m.ndim != 3 or self.m.shape[-1] != 3:
            raise ValueError("m must have shape (n1, n2, 3)")
        if self.Q.shape != self.m.shape[:2] + (3, 3):
            raise ValueError("Q must have shape (n1, n2, 3, 3)")

    @property
    def shape(self):
        return self.m.shape[:2]

    @property
    def m_flat(self):
        return self.m.reshape(-1, 3)

    @property
    def Q_flat(self):
        return self.Q.reshape(-1, 3, 3)

    def copy(self):
        return ShellState(self.m.copy(), self.Q.copy())


def identity_state(grid, patch):
    X1, X2 = np.meshgrid(grid.x1, grid.x2, indexing="ij")
    m = patch.position(X1, X2)
    Q = np.broadcast_to(_EYE, grid.shape + (3, 3)).copy()
    return ShellState(m, Q)


def _nodal(value, grid, tail):
    if value is None:
        return None
    a = np.asarray(value, dtype=float)
    if a.shape == tail:
        a = np.broadcast_to(a, (grid.size,) + tail)
    return a.reshape((grid.size,) + tail)


@dataclass
class LoadSpec:
    """Resultant loads.

    N0, M1: force resultant and first moment per unit area, constant (3,) or
    nodal (n1, n2, 3). C0, C1: couple resultants on the gamma1 edges, constant
    (3, 3) or nodal (n1, n2, 3, 3). include_h2 switches on the h^2 terms.
    """

    N0: object = None
    M1: object = None
    C0: object = None
    C1: object = None
    gamma1: tuple = ()
    include_h2: bool = False

    def is_zero(self):
        return all(v is None or not np.any(np.asarray(v)) for v in
                   (self.N0, self.M1, self.C0, self.C1))


@dataclass
class EnergyBreakdown:
    membrane: float
    curvature: float
    load_potential: float

    @property
    def total(self):
        return self.membrane + self.curvature - self.load_potential

    def as_dict(self):
        return {"membrane": self.membrane, "curvature": self.curvature,
                "load": self.load_potential, "total": self.total}


class ShellModel:
    """Bundles grid, geometry, material and loads.

    The limit densities are multiplied by `prefactor` (default: h) so that
    the energy and the h-scaled load resultants share one scaling.
    """

    def __init__(self, grid, patch, mat, loads=None, h=1.0, prefactor=None, geom=None):
        self.grid = grid
        self.patch = patch
        self.mat = mat
        self.loads = loads if loads is not None else LoadSpec()
        self.h = float(h)
        self.prefactor = self.h if prefactor is None else float(prefactor)
        self.geom = grid_geometry(patch, grid) if geom is None else geom
        fr = self.geom.frame
        self.frame = fr
        self.wm = membrane_weights(mat)
        self.wc = curvature_weights(mat)
        self.node_w = grid.weights * fr.det_g * self.prefactor
        self.free = ~grid.dirichlet_mask
        self._Ginv_T2 = np.swapaxes(fr.grad_theta0_inv, -1, -2)[..., :2]
        L = self.loads
        self.N0 = _nodal(L.N0, grid, (3,))
        self.M1 = _nodal(L.M1, grid, (3,))
        self.C0 = _nodal(L.C0, grid, (3, 3))
        self.C1 = _nodal(L.C1, grid, (3, 3))
        self.edge_w = grid.edge_weights(L.gamma1) if L.gamma1 else np.zeros(grid.size)
        self._bnodes = np.nonzero(self.edge_w)[0]
        self._Lambda = None
        if L.include_h2 and self.C1 is not None and self._bnodes.size:
            sub = _subframe(fr, self._bnodes)
            self._Lambda = rotation_rate_operator(sub, mat)

    # -- strain measures ------------------------------------------------------
    def kinematics(self, m, Q, tol=0.1):
        grid, fr = self.grid, self.frame
        gm = grid.grad(m)
        gQ = grid.grad(Q)
        QT = np.swapaxes(Q, -1, -2)
        Ms, ks = [], []
        for j in range(2):
            M = QT @ gQ[..., j]
            if np.any(skew_defect(M, tol)):
                raise NotATangentDerivative(
                    f"rotation field too rough in direction {j + 1} ({np.max(np.abs(sym(M))):.3e})")
            Ms.append(M)
            ks.append(axl_skew(M))
        Cm = _pad(QT @ gm) @ fr.grad_theta0_inv
        E = Cm - _pad(fr.grad_y) @ fr.grad_theta0_inv
        K = _pad(np.stack(ks, -1)) @ fr.grad_theta0_inv
        return dict(gm=gm, E=E, K=K, Cm=Cm, M=Ms, k=ks)

    def densities(self, state):
        kin = self.kinematics(state.m_flat, state.Q_flat)
        return hom_form(kin["E"], self.frame, self.wm), hom_form(kin["K"], self.frame, self.wc)

    # -- energy and gradient --------------------------------------------------
    def evaluate(self, state, need_grad=False):
        m, Q = state.m_flat, state.Q_flat
        fr, grid, h = self.frame, self.grid, self.h
        kin = self.kinematics(m, Q)
        E, K = kin["E"], kin["K"]
        W = self.node_w
        memb = float(np.sum(W * hom_form(E, fr, self.wm)))
        curv = float(np.sum(W * hom_form(K, fr, self.wc)))

        load = 0.0
        gmat = np.zeros(m.shape)
        gom = np.zeros(m.shape)
        SE = hom_form_grad(E, fr, self.wm) * W[:, None, None] if need_grad else None
        gk = None
        if need_grad:
            SK = hom_form_grad(K, fr, self.wc) * W[:, None, None]
            gK = SK @ np.swapaxes(fr.grad_theta0_inv, -1, -2)
            gk = [gK[..., 0].copy(), gK[..., 1].copy()]

        if self.N0 is not None:
            u = m - self.geom.y0
            load += h * float(np.sum(grid.weights * np.sum(self.N0 * u, -1)))
            if need_grad:
                gmat -= h * grid.weights[:, None] * self.N0

        if self.loads.include_h2 and self.M1 is not None:
            n = fr.normal
            beta = self.mat.lam / (2.0 * self.mat.mu + self.mat.lam)
            gam = (self.mat.mu_c - self.mat.mu) / (self.mat.mu_c + self.mat.mu)
            d = optimal_director(E, Q, fr, self.mat)
            c = h * h * grid.weights
            load += float(np.sum(c * np.sum(self.M1 * (d - n), -1)))
            if need_grad:
                a = np.einsum("nji,nj->ni", Q, self.M1)
                an = np.sum(a * n, -1)
                Y = -beta * an[:, None, None] * _EYE + gam * n[:, :, None] * a[:, None, :]
                SE -= c[:, None, None] * Y
                tr = np.trace(E, axis1=-2, axis2=-1)
                b = (1.0 - beta * tr)[:, None] * n + gam * normal_row(E, fr)
                gom -= c[:, None] * np.cross(b, a)

        bn = self._bnodes
        if self.C0 is not None and bn.size:
            c = h * self.edge_w[bn]
            load += float(np.sum(c * np.sum(self.C0[bn] * Q[bn], axis=(-2, -1))))
            if need_grad:
                X = np.swapaxes(Q[bn], -1, -2) @ self.C0[bn]
                gom[bn] -= c[:, None] * 2.0 * axl_skew(X)

        if self._Lambda is not None:
            c = h * h * self.edge_w[bn]
            kb = np.concatenate([kin["k"][0][bn], kin["k"][1][bn]], -1)
            astar = np.einsum("nij,nj->ni", self._Lambda, kb)
            X = np.swapaxes(Q[bn], -1, -2) @ self.C1[bn]
            s = axl_skew(X)
            load += float(np.sum(c * 2.0 * np.sum(astar * s, -1)))
            if need_grad:
                dk = 2.0 * np.einsum("nij,ni->nj", self._Lambda, s)
                gk[0][bn] -= c[:, None] * dk[:, :3]
                gk[1][bn] -= c[:, None] * dk[:, 3:]
                gom[bn] -= c[:, None] * (-2.0) * axl_skew(anti(astar) @ np.swapaxes(X, -1, -2))

        eb = EnergyBreakdown(memb, curv, load)
        if not need_grad:
            return eb

        # membrane: dW/d(grad m) = Q (S G^-T)[:, :2]
        P = Q @ (SE @ np.swapaxes(fr.grad_theta0_inv, -1, -2))[..., :2]
        gmat += grid.grad_transpose(P[..., 0], P[..., 1])
        gom += -2.0 * axl_skew(SE @ np.swapaxes(kin["Cm"], -1, -2))
        # curvature: dk_j = axl skew(Q^T dQ_j) under Q -> Q exp(anti w)
        QT = np.swapaxes(Q, -1, -2)
        for j in range(2):
            Pj = 0.5 * anti(gk[j])
            M = kin["M"][j]
            gom += -2.0 * axl_skew(Pj @ np.swapaxes(M, -1, -2))
            Dt = grid.D1T if j == 0 else grid.D2T
            Z = (Dt @ (Q @ Pj).reshape(grid.size, 9)).reshape(-1, 3, 3)
            gom += 2.0 * axl_skew(QT @ Z)
        gmat[~self.free] = 0.0
        return eb, gmat, gom

    def energy(self, state):
        return self.evaluate(state)

    def gradient(self, state):
        _, gm, gw = self.evaluate(state, need_grad=True)
        return gm.reshape(state.m.shape), gw.reshape(state.m.shape)

    def retract(self, state, dm, dw):
        """m + dm (free nodes only) and Q exp(anti(dw))."""
        dm = np.where(self.free[:, None], dm.reshape(-1, 3), 0.0)
        m = state.m + dm.reshape(state.m.shape)
        Q = state.Q @ exp_so3(dw.reshape(state.m.shape))
        return ShellState(m, Q)


def _subframe(fr, idx):
    from dataclasses import fields as dc_fields, replace
    vals = {}
    for f in dc_fields(fr):
        v = getattr(fr, f.name)
        vals[f.name] = None if v is None else v[idx]
    return replace(fr, **vals)


def total_energy(state, grid, patch, mat, loads=None, h=1.0, prefactor=None):
    return ShellModel(grid, patch, mat, loads, h, prefactor).evaluate(state)


def gradient(state, grid, patch, mat, loads=None, h=1.0, prefactor=None):
    return ShellModel(grid, patch, mat, loads, h, prefactor).gradient(state)


def load_potential(state, loads, grid, h, patch, mat=None):
    from .cosserat3d import MaterialParams
    mat = MaterialParams() if mat is None else mat
    return ShellModel(grid, patch, mat, loads, h).evaluate(state).load_potential


def limit_energy(state, grid, geom, mat):
    """J0 without prefactor or loads, on a precomputed grid geometry."""
    model = ShellModel(grid, None, mat, None, 1.0, 1.0, geom=geom)
    eb = model.evaluate(state)
    return eb.membrane + eb.curvature


# ---------------------------------------------------------------------------
# minimization

@dataclass
class SolverOptions:
    max_iter: int = 500
    tol: float = 1e-8
    step_rule: str = "lbfgs"
    memory: int = 10
    c1: float = 1e-4
    max_halvings: int = 60
    reortho_every: int = 100
    checkpoint_every: int = 0
    checkpoint_path: str | None = None

    def __post_init__(self):
        if self.step_rule not in ("lbfgs", "armijo"):
            raise ValueError("step_rule must be 'lbfgs' or 'armijo'")
        if self.max_iter < 0 or self.tol <= 0:
            raise ValueError("max_iter must be >= 0 and tol > 0")


@dataclass
class OptimizerMemory:
    """Everything needed to continue a run bit-identically."""

    iteration: int = 0
    alpha: float = 1.0
    S: list = field(default_factory=list)
    Y: list = field(default_factory=list)

    def save(self, path):
        np.savez(path, iteration=self.iteration, alpha=self.alpha,
                 S=np.array(self.S), Y=np.array(self.Y))

    @classmethod
    def load(cls, path):
        with np.load(path) as z:
            S = [row.copy() for row in z["S"]]
            Y = [row.copy() for row in z["Y"]]
            return cls(int(z["iteration"]), float(z["alpha"]), S, Y)


def _two_loop(g, S, Y):
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(S), reversed(Y)):
        rho = 1.0 / np.dot(y, s)
        a = rho * np.dot(s, q)
        alphas.append((rho, a))
        q -= a * y
    if S:
        q *= np.dot(S[-1], Y[-1]) / np.dot(Y[-1], Y[-1])
    for (s, y), (rho, a) in zip(zip(S, Y), reversed(alphas)):
        b = rho * np.dot(y, q)
        q += (a - b) * s
    return -q


def minimize(model, state0, options=None, memory=None, callback=None):
    """Armijo line search on R^3 x SO(3) with retraction Q <- Q exp(anti(step)).

    Returns (state, log, memory); log rows follow the CSV column order.
    callback(iteration, state, log, memory) runs after every accepted step.
    """
    opt = options or SolverOptions()
    mem = memory or OptimizerMemory()
    state = state0.copy()
    N = state.m_flat.shape[0]
    eb, gm, gw = model.evaluate(state, need_grad=True)
    g = np.concatenate([gm.ravel(), gw.ravel()])
    log = [_log_row(mem.iteration, eb, g, 0.0)]
    while True:
        if np.max(np.abs(g)) < opt.tol or mem.iteration >= opt.max_iter:
            break
        if opt.step_rule == "lbfgs":
            p = _two_loop(g, mem.S, mem.Y)
            if np.dot(p, g) >= 0:
                mem.S.clear()
                mem.Y.clear()
                p = -g
            alpha = 1.0
        else:
            p = -g
            alpha = min(2.0 * mem.alpha, 1e6)
        slope = float(np.dot(g, p))
        f0 = eb.total
        accepted = None
        for _ in range(opt.max_halvings + 1):
            trial = model.retract(state, alpha * p[:3 * N], alpha * p[3 * N:])
            try:
                eb_t, gm_t, gw_t = model.evaluate(trial, need_grad=True)
            except (NotATangentDerivative, FloatingPointError, np.linalg.LinAlgError):
                alpha *= 0.5
                continue
            if np.isfinite(eb_t.total) and eb_t.total <= f0 + opt.c1 * alpha * slope:
                accepted = (trial, eb_t, gm_t, gw_t)
                break
            alpha *= 0.5
        if accepted is None:
            raise LineSearchFailed(
                f"Armijo backtracking exhausted {opt.max_halvings} halvings "
                f"at iteration {mem.iteration}")
        trial, eb, gm, gw = accepted
        g_new = np.concatenate([gm.ravel(), gw.ravel()])
        s, y = alpha * p, g_new - g
        if opt.step_rule == "lbfgs" and np.dot(s, y) > 1e-16 * np.dot(s, s):
            mem.S.append(s)
            mem.Y.append(y)
            if len(mem.S) > opt.memory:
                mem.S.pop(0)
                mem.Y.pop(0)
        mem.alpha = alpha
        state, g = trial, g_new
        mem.iteration += 1
        # keyed on the global counter so resumed runs reproject at the same steps
        if opt.reortho_every and mem.iteration % opt.reortho_every == 0:
            drift = orthogonality_defect(state.Q)
            assert drift < 1e-10, f"rotation drift {drift:.3e} before reprojection"
            state = ShellState(state.m, reorthonormalize(state.Q))
        log.append(_log_row(mem.iteration, eb, g, alpha))
        if callback is not None:
            callback(mem.iteration, state, log, mem)
    return state, log, mem


def _log_row(it, eb, g, step):
    return {"iter": it, "membrane": eb.membrane, "curvature": eb.curvature,
            "load": eb.load_potential, "total": eb.total,
            "grad_inf_norm": float(np.max(np.abs(g))) if g.size else 0.0, "step": step}
