import numpy as np
import pytest

from cosshell import reconstruct as rc
from cosshell import surface
from cosshell.assemble import identity_state
from cosshell.cosserat3d import MaterialParams, w_curv_tilde, w_mp
from cosshell.grid import ShellGrid, grid_geometry
from cosshell.oracles import brute_force_director, brute_force_rotation_rate
from cosshell.presets import smooth_state
from cosshell.shellcore import curvature_from_columns, strain_E, w_curv_hom, w_mp_hom
from cosshell.verification import membrane_samples, random_frames

MAT = MaterialParams(mu=1.3, lam=0.7, mu_c=0.4, L_c=0.8, a1=1.1, a2=0.9, a3=0.5)


def test_director_at_identity_is_normal():
    fr = surface.frame_at(surface.sphere_cap(1.0), np.array(0.1), np.array(-0.2))
    E = strain_E(fr.grad_y, np.eye(3), fr)
    np.testing.assert_allclose(rc.optimal_director(E, np.eye(3), fr, MAT), fr.normal, atol=1e-15)


def test_director_frozen_plate_stretch():
    # plate, Q = I, uniform stretch 1 + e in x1: d* = (1 - lam/(2 mu + lam) e) e3
    m = MaterialParams(mu=1.0, lam=2.0, mu_c=1.0)
    fr = surface.frame_at(surface.plate(), np.array(0.5), np.array(0.5))
    gm = np.array([[1.1, 0.0], [0.0, 1.0], [0.0, 0.0]])
    d = rc.optimal_director(strain_E(gm, np.eye(3), fr), np.eye(3), fr, m)
    np.testing.assert_allclose(d, [0.0, 0.0, 1.0 - 0.5 * 0.1], atol=1e-15)


def test_director_matches_brute_force():
    rng = np.random.default_rng(5)
    for fr, Q, gm in membrane_samples(rng, 12):
        E = strain_E(gm, Q, fr)
        best, c = brute_force_director(gm, Q, fr.grad_theta0_inv, MAT, rng)
        d = rc.optimal_director(E, Q, fr, MAT)
        assert abs(best - w_mp_hom(E, fr, MAT)) < 1e-8
        assert abs(w_mp(rc.stretch_with_director(gm, d, Q, fr), MAT) - w_mp_hom(E, fr, MAT)) < 1e-12
        np.testing.assert_allclose(c, d, atol=1e-5)


def test_biot_normal_traction_vanishes():
    rng = np.random.default_rng(6)
    for fr, Q, gm in membrane_samples(rng, 30):
        d = rc.optimal_director(strain_E(gm, Q, fr), Q, fr, MAT)
        T = rc.biot_stress(rc.stretch_with_director(gm, d, Q, fr), MAT)
        assert np.linalg.norm(T @ fr.normal) < 1e-9


def test_rotation_rate_matches_brute_force():
    rng = np.random.default_rng(7)
    for fr in random_frames(rng, 12):
        k1, k2 = rng.normal(size=(2, 3))
        K = curvature_from_columns(k1, k2, fr)
        best, a_b = brute_force_rotation_rate(K, fr.normal, MAT)
        a = rc.optimal_rotation_rate(k1, k2, fr, MAT)
        w = w_curv_hom(K, fr, MAT)
        assert abs(best - w) < 1e-8
        assert abs(w_curv_tilde(K + np.outer(a, fr.normal), MAT) - w) < 1e-12
        np.testing.assert_allclose(a, a_b, atol=1e-6)


def test_rotation_rate_operator_is_linear_and_batched():
    rng = np.random.default_rng(8)
    X1, X2 = np.meshgrid([0.2, 0.6], [0.3, 0.8], indexing="ij")
    fr = surface.frame_at(surface.cylinder(1.5), X1, X2)
    L = rc.rotation_rate_operator(fr, MAT)
    k = rng.normal(size=(2, 2, 6))
    a = rc.optimal_rotation_rate(k[..., :3], k[..., 3:], fr, MAT)
    np.testing.assert_allclose(np.einsum("...ij,...j->...i", L, k), a, atol=1e-12)


def test_reconstruction_bundle():
    fr = surface.frame_at(surface.plate(), np.array(0.5), np.array(0.5))
    r = rc.reconstruct(fr.grad_y, np.eye(3), np.zeros((3, 3)), np.zeros((3, 3)), fr, MAT)
    np.testing.assert_allclose(r.d_star, [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(r.A_star, np.zeros((3, 3)), atol=1e-15)


def test_gamma_gap_vanishes_for_flat_identity():
    p = surface.plate()
    g = ShellGrid(9, 9, p.bounds)
    geo = grid_geometry(p, g)
    assert abs(rc.gamma_gap(0.1, identity_state(g, p), g, geo, MAT, n3=3)) < 1e-10


def test_gamma_gap_decreases_on_cylinder():
    p = surface.cylinder(1.5)
    g = ShellGrid(17, 17, p.bounds)
    geo = grid_geometry(p, g)
    s = smooth_state(g, p, 0.05)
    gaps = [rc.gamma_gap(h, s, g, geo, MAT, n3=5) for h in (0.2, 0.1, 0.05)]
    assert gaps[0] > gaps[1] > gaps[2] > 0
    assert gaps[1] / gaps[2] == pytest.approx(4.0, rel=0.05)
