import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from cosshell import shellcore as sc
from cosshell import surface
from cosshell.cosserat3d import MaterialParams
from cosshell.oracles import fd_gradient
from cosshell.rotalg import anti, exp_so3, frob2
from cosshell.verification import random_frames, structured_tensors

MAT = MaterialParams(mu=1.3, lam=0.7, mu_c=0.4, L_c=0.8, a1=1.1, a2=0.9, a3=0.5)
cols = arrays(np.float64, (3, 2), elements=st.floats(-2.0, 2.0))
pt = st.floats(0.1, 0.9)


def _frame(x1, x2):
    return surface.frame_at(surface.cylinder(1.5), np.array(x1), np.array(x2))


def test_identity_strains_vanish():
    fr = _frame(0.3, 0.6)
    E = sc.strain_E(fr.grad_y, np.eye(3), fr)
    assert np.max(np.abs(E)) < 1e-15
    assert sc.w_mp_hom(E, fr, MAT) == 0.0


@given(cols, pt, pt)
def test_strain_is_structured_and_frame_indifferent(Y, x1, x2):
    fr = _frame(x1, x2)
    Q = exp_so3(np.array([0.2, -0.4, 0.9]))
    gm = Q @ (fr.grad_y + Y)
    E = sc.strain_E(gm, Q, fr)
    sc.check_structure(E, fr)
    R = exp_so3(np.array([1.0, 0.5, -0.3]))
    np.testing.assert_allclose(sc.strain_E(R @ gm, R @ Q, fr), E, atol=1e-12)


def test_check_structure_rejects_normal_column():
    fr = _frame(0.5, 0.5)
    X = np.outer([1.0, 0.0, 0.0], fr.normal)
    with pytest.raises(sc.StructuralViolation):
        sc.check_structure(X, fr)
    with pytest.raises(sc.StructuralViolation):
        sc.w_mp_hom(X, fr, MAT)


@given(arrays(np.float64, (3, 3), elements=st.floats(-2, 2)))
def test_w_shell_dev_form(X):
    a, b = sc.w_shell(X, MAT), sc.w_shell_dev(X, MAT)
    assert abs(a - b) <= 1e-12 * max(1.0, a)


def test_weights_frozen():
    m = MaterialParams(mu=2.0, lam=4.0, mu_c=1.0, L_c=1.0, a1=1.0, a2=3.0, a3=1.0)
    w = sc.membrane_weights(m)
    assert (w.s, w.k) == (2.0, 1.0)
    assert w.t == pytest.approx(1.0, rel=1e-15)  # lam mu/(lam + 2 mu) = 8/8
    assert w.p == pytest.approx(4.0 / 3.0, rel=1e-15)  # 2 mu mu_c/(mu + mu_c)
    c = sc.curvature_weights(m)
    b3 = 11.0 / 3.0
    # mu Lc^2 = 2
    assert c.t == pytest.approx(2.0 * b3 / (1.0 + b3), rel=1e-15)
    assert c.p == pytest.approx(3.0, rel=1e-15)


def test_hom_form_grad_against_fd():
    rng = np.random.default_rng(1)
    for fr, X in structured_tensors(rng, 6):
        for w in (sc.membrane_weights(MAT), sc.curvature_weights(MAT)):
            G = sc.hom_form_grad(X, fr, w)
            Gfd = fd_gradient(lambda Y: sc.hom_form(Y, fr, w), X)
            np.testing.assert_allclose(G, Gfd, atol=1e-7)


def test_bend_columns_of_rotation_field():
    # Q(x) = exp(anti(a + B x)); columns are axl(Q^T dQ_j)
    a, B = np.array([0.1, 0.2, -0.3]), np.array([[0.5, 0.1], [-0.2, 0.3], [0.4, 0.0]])
    x, e = np.array([0.3, 0.7]), 1e-6
    Q = exp_so3(a + B @ x)
    dQ = [(exp_so3(a + B @ (x + e * d)) - exp_so3(a + B @ (x - e * d))) / (2 * e)
          for d in np.eye(2)]
    k1, k2 = sc.bend_columns(dQ[0], dQ[1], Q)
    Rk = [Q @ anti(k) for k in (k1, k2)]
    np.testing.assert_allclose(Rk[0], dQ[0], atol=1e-9)
    np.testing.assert_allclose(Rk[1], dQ[1], atol=1e-9)
    with pytest.raises(sc.NotATangentDerivative):
        sc.bend_columns(dQ[0] + np.eye(3), dQ[1], Q)


def test_harmonic_shear_below_algebraic_mean():
    rng = np.random.default_rng(2)
    for fr, X in structured_tensors(rng, 20):
        assert sc.w_mp_hom(X, fr, MAT) <= sc.w_mp_algebraic_mean(X, fr, MAT) + 1e-14


@given(pt, pt)
def test_forms_positive_definite_on_structured(x1, x2):
    fr = _frame(x1, x2)
    rng = np.random.default_rng(int(1e6 * x1))
    X = np.concatenate([rng.normal(size=(3, 2)), np.zeros((3, 1))], 1) @ fr.grad_theta0_inv
    lo = min(MAT.mu, MAT.mu_c, 2 * MAT.mu * MAT.mu_c / (MAT.mu + MAT.mu_c))
    assert sc.w_mp_hom(X, fr, MAT) >= lo * frob2(X) * (1 - 1e-12)
    assert sc.w_curv_hom(X, fr, MAT) > 0


def test_density_J0_scales_with_area_element():
    rng = np.random.default_rng(4)
    fr = random_frames(rng, 1, [surface.sphere_cap(1.0)])[0]
    X = np.concatenate([rng.normal(size=(3, 2)), np.zeros((3, 1))], 1) @ fr.grad_theta0_inv
    d = sc.density_J0(X, X, fr, MAT)
    assert d == pytest.approx((sc.w_mp_hom(X, fr, MAT) + sc.w_curv_hom(X, fr, MAT)) * fr.det_g,
                              rel=1e-15)
