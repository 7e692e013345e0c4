"""Dipole approximation: closed-form cases, gradient identity, breakdown."""

import numpy as np
import pytest

from emff import frames
from emff.errors import ValidationError
from emff.field_exact import MU0, MU0_OVER_4PI, CoilSpec, q_matrix_exact, pair_wrench
from emff.field_farfield import dipole_field, farfield_wrench, q_matrix_farfield


class TestDipoleField:
    def test_on_axis(self):
        b = dipole_field(np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0]))
        np.testing.assert_allclose(b, [0.0, 0.0, 2.0e-7], rtol=1e-15)

    def test_equatorial(self):
        b = dipole_field(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
        np.testing.assert_allclose(b, [0.0, 0.0, -1.0e-7], rtol=1e-15)

    def test_cubic_decay(self):
        mu = np.array([0.3, -0.2, 0.9])
        r = np.array([0.4, 0.5, -0.1])
        np.testing.assert_allclose(dipole_field(mu, 2.0 * r),
                                   dipole_field(mu, r) / 8.0, rtol=1e-12)

    def test_zero_position_rejected(self):
        with pytest.raises(ValidationError):
            dipole_field(np.array([0.0, 0.0, 1.0]), np.zeros(3))


class TestFarfieldWrench:
    def test_coaxial_attraction(self):
        mu = 2.5
        d = 1.2
        w = farfield_wrench(np.array([0.0, 0.0, mu]), np.array([0.0, 0.0, mu]),
                            np.array([0.0, 0.0, d]))
        expected = -3.0 * MU0 * mu * mu / (2.0 * np.pi * d**4)
        np.testing.assert_allclose(w.force, [0.0, 0.0, expected], rtol=1e-12)
        np.testing.assert_allclose(w.torque, np.zeros(3), atol=1e-25)

    def test_antiparallel_flips_force(self):
        mu_j = np.array([0.0, 0.0, 2.0])
        mu_k = np.array([0.0, 0.0, 1.0])
        r = np.array([0.0, 0.0, 0.9])
        attract = farfield_wrench(mu_j, mu_k, r).force
        repel = farfield_wrench(-mu_j, mu_k, r).force
        np.testing.assert_allclose(repel, -attract, rtol=1e-12)

    def test_moment_parallel_field_zero_torque(self):
        mu_k = np.array([0.0, 0.0, 1.0])
        r = np.array([0.0, 0.0, 2.0])
        b = dipole_field(mu_k, r)
        mu_j = 5.0 * b / np.linalg.norm(b)
        w = farfield_wrench(mu_j, mu_k, r)
        np.testing.assert_allclose(w.torque, np.zeros(3), atol=1e-22)

    def test_force_is_gradient_of_interaction_energy(self):
        # f = grad(mu_j . B_k) over the relative position
        rng = np.random.default_rng(20)
        for _ in range(25):
            mu_j = rng.normal(size=3)
            mu_k = rng.normal(size=3)
            r = rng.normal(size=3)
            r *= rng.uniform(0.5, 2.0) / np.linalg.norm(r)
            w = farfield_wrench(mu_j, mu_k, r)
            h = 1e-6
            grad = np.empty(3)
            for a in range(3):
                dr = np.zeros(3)
                dr[a] = h
                up = mu_j @ dipole_field(mu_k, r + dr)
                dn = mu_j @ dipole_field(mu_k, r - dr)
                grad[a] = (up - dn) / (2.0 * h)
            assert np.abs(grad - w.force).max() <= 1e-6 * np.abs(w.force).max()


class TestQMatrixFarfield:
    def test_basis_reconstruction(self, coil):
        rng = np.random.default_rng(21)
        for _ in range(100):
            r = rng.normal(size=3)
            r *= rng.uniform(0.5, 2.0) / np.linalg.norm(r)
            dcm_j = frames.random_rotation(rng)
            dcm_k = frames.random_rotation(rng)
            q = q_matrix_farfield(r, dcm_j, dcm_k, coil)
            mu_k_body = coil.moment(rng.uniform(-5, 5, 3))
            mu_j_body = coil.moment(rng.uniform(-5, 5, 3))
            via_q = pair_wrench(q, mu_k_body, mu_j_body).as_vector()
            direct = farfield_wrench(dcm_j @ mu_j_body, dcm_k @ mu_k_body,
                                     r).as_vector()
            assert np.abs(via_q - direct).max() <= 1e-12 * np.abs(direct).max()

    def test_coaxial_sparsity_matches_exact(self, coil):
        r = np.array([0.0, 0.0, 1.0])
        qe = q_matrix_exact(r, np.eye(3), np.eye(3), coil, n_quad=128)
        qf = q_matrix_farfield(r, np.eye(3), np.eye(3), coil)
        mask_e = np.abs(qe) > 1e-9 * np.abs(qe).max()
        mask_f = np.abs(qf) > 1e-9 * np.abs(qf).max()
        assert np.array_equal(mask_e, mask_f)

    def test_cross_model_error_at_ten_radii(self, coil):
        # frozen oracle measurement: the far-field Q is ~3.2 % off (Frobenius)
        # for the coaxial pair at ten radii
        r = np.array([0.0, 0.0, 10.0 * coil.radius])
        qe = q_matrix_exact(r, np.eye(3), np.eye(3), coil, n_quad=256)
        qf = q_matrix_farfield(r, np.eye(3), np.eye(3), coil)
        rel = np.linalg.norm(qf - qe) / np.linalg.norm(qe)
        assert rel == pytest.approx(0.0323, abs=0.002)

    def test_breakdown_curve(self, coil):
        # Q-level error grows monotonically toward contact range
        errors = []
        for mult in (2, 4, 6, 10):
            r = np.array([0.0, 0.0, mult * coil.radius])
            qe = q_matrix_exact(r, np.eye(3), np.eye(3), coil, n_quad=256,
                                min_separation=0.19)
            qf = q_matrix_farfield(r, np.eye(3), np.eye(3), coil)
            errors.append(np.linalg.norm(qf - qe) / np.linalg.norm(qe))
        assert all(a > b for a, b in zip(errors, errors[1:]))
        np.testing.assert_allclose(errors, [1.000, 0.212, 0.0937, 0.0323],
                                   rtol=0.03)
