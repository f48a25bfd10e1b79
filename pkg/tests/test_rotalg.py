import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from cosshell import rotalg as ra
from cosshell.cosserat3d import dislocation_density
from cosshell.oracles import series_exp, svd_polar

finite = st.floats(-3.0, 3.0, allow_nan=False)
vec3 = arrays(np.float64, 3, elements=finite)
mat3 = arrays(np.float64, (3, 3), elements=finite)


def test_anti_matches_cross_product_frozen():
    v = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(ra.anti(v), [[0, -3, 2], [3, 0, -1], [-2, 1, 0]])
    w = np.array([-0.5, 0.25, 4.0])
    np.testing.assert_allclose(ra.anti(v) @ w, np.cross(v, w), atol=1e-15)


@given(vec3)
def test_axl_inverts_anti(v):
    np.testing.assert_allclose(ra.axl(ra.anti(v)), v, atol=1e-15)
    assert abs(ra.frob2(ra.anti(v)) - 2.0 * v @ v) <= 1e-12 * max(1.0, v @ v)


def test_axl_rejects_symmetric_part():
    with pytest.raises(ra.NonSkew):
        ra.axl(np.eye(3))


def test_exp_quarter_turn_frozen():
    Q = ra.exp_so3([0.0, 0.0, np.pi / 2])
    np.testing.assert_allclose(Q, [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-15)


@given(vec3)
def test_exp_against_power_series(v):
    # keep the angle where 20 series terms are exact to round-off
    n = np.linalg.norm(v)
    if n > 1.5:
        v = v * 1.5 / n
    np.testing.assert_allclose(ra.exp_so3(v), series_exp(ra.anti(v), 20), atol=1e-12)


@pytest.mark.parametrize("theta", [0.0, 1e-9, 9.9e-5, 1.01e-4, 1e-3])
def test_exp_small_angle_branch_is_continuous(theta):
    v = theta * np.array([0.6, -0.8, 0.0])
    np.testing.assert_allclose(ra.exp_so3(v), series_exp(ra.anti(v), 12), atol=1e-15)


@given(vec3)
def test_exp_is_rotation_and_log_inverts(v):
    Q = ra.exp_so3(v)
    assert ra.orthogonality_defect(Q) < 1e-14
    assert abs(np.linalg.det(Q) - 1.0) < 1e-14
    if np.linalg.norm(v) < 3.0:
        np.testing.assert_allclose(ra.log_so3(Q), v, atol=1e-9)


def test_exp_skew_matrix_input():
    v = np.array([0.3, -0.1, 0.7])
    np.testing.assert_array_equal(ra.exp_skew(ra.anti(v)), ra.exp_so3(v))
    with pytest.raises(ra.NonSkew):
        ra.exp_skew(np.eye(3))


def test_exp_stack_of_three_vectors_is_not_a_matrix():
    # regression: a (3, 3) stack of axial vectors must give three rotations
    V = np.array([[0.1, 0.0, 0.0], [0.0, 0.2, 0.0], [0.0, 0.0, 0.3]])
    Q = ra.exp_so3(V)
    assert Q.shape == (3, 3, 3)
    for k in range(3):
        np.testing.assert_allclose(Q[k], ra.exp_so3(V[k]), atol=0)


@given(mat3, vec3)
def test_polar_matches_svd(X, w):
    F = ra.exp_so3(w) @ (np.eye(3) + 0.3 * X / max(1.0, np.abs(X).max()))
    if np.linalg.det(F) < 1e-2:
        return
    Q, U = ra.polar_decompose(F)
    Qs, Us = svd_polar(F)
    np.testing.assert_allclose(Q, Qs, atol=1e-9)
    np.testing.assert_allclose(U, Us, atol=1e-9)
    np.testing.assert_allclose(Q @ U, F, atol=1e-12)


def test_polar_rejects_reflection():
    with pytest.raises(ra.NonInvertible):
        ra.polar_decompose(np.diag([1.0, 1.0, -1.0]))


@given(mat3)
def test_cartan_split_orthogonal(X):
    D, S, t = ra.cartan_split(X)
    assert abs(ra.inner(D, S)) < 1e-12
    assert abs(np.trace(D)) < 1e-12
    np.testing.assert_allclose(D + S + t / 3.0 * np.eye(3), X, atol=1e-13)
    lhs = ra.frob2(X)
    rhs = ra.frob2(D) + ra.frob2(S) + t * t / 3.0
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, lhs)


@given(mat3)
def test_nye_roundtrip_exact(G):
    np.testing.assert_allclose(ra.nye_alpha_to_gamma(ra.nye_gamma_to_alpha(G)), G, atol=1e-14)
    np.testing.assert_allclose(ra.nye_gamma_to_alpha(ra.nye_alpha_to_gamma(G)), G, atol=1e-14)


def test_nye_frozen_example():
    G = np.array([[1.0, 2.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 2.0]])
    # -G^T + tr(G) I with tr = 6
    np.testing.assert_array_equal(ra.nye_gamma_to_alpha(G),
                                  [[5.0, 0.0, 0.0], [-2.0, 3.0, 0.0], [0.0, 0.0, 4.0]])


def test_curl_form_agrees_with_nye_formula():
    rng = np.random.default_rng(3)
    a0, B = rng.normal(size=3), rng.normal(size=(3, 3))

    def Qf(x):
        return ra.exp_so3(a0 + B @ x)

    x = rng.normal(size=3)
    e = 1e-6
    dQ = [(Qf(x + e * d) - Qf(x - e * d)) / (2 * e) for d in np.eye(3)]
    Q = Qf(x)
    Gam = np.column_stack([ra.axl_skew(Q.T @ d) for d in dQ])
    np.testing.assert_allclose(dislocation_density(Q, dQ), ra.nye_gamma_to_alpha(Gam), atol=1e-8)


def test_reorthonormalize_projects_back():
    rng = np.random.default_rng(0)
    Q = ra.exp_so3(rng.normal(size=(5, 3)))
    R = ra.reorthonormalize(Q + 1e-6 * rng.normal(size=Q.shape))
    assert ra.orthogonality_defect(R) < 1e-14
    assert np.max(np.abs(R - Q)) < 1e-5
    single = ra.reorthonormalize(Q[0])
    assert single.shape == (3, 3)


def test_skew_defect_flags_symmetric_parts_only():
    S = ra.anti(np.array([1.0, 0.0, 0.0]))
    assert not ra.skew_defect(S[None])[0]
    assert ra.skew_defect((S + np.eye(3))[None])[0]
    # stationary points in a stack are judged against the stack RMS
    stack = np.stack([S, 1e-13 * np.eye(3)])
    assert not np.any(ra.skew_defect(stack))
