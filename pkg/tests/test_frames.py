"""Frame conventions and the canonical-pair reduction."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from emff import frames
from emff.errors import ValidationError
from emff.field_exact import GeometryKernels, pair_kernel
from conftest import TABLE_COIL, draw_admissible_pair


def vec3(lo=-1.0, hi=1.0):
    f = st.floats(min_value=lo, max_value=hi, allow_nan=False)
    return st.tuples(f, f, f).map(np.array)


class TestCyclicCoilFrame:
    def test_identity_axis_z_is_identity(self):
        out = frames.cyclic_coil_frame(np.eye(3), "z")
        np.testing.assert_allclose(out, np.eye(3), atol=0)

    def test_identity_axis_x_columns(self):
        out = frames.cyclic_coil_frame(np.eye(3), "x")
        expected = np.column_stack([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
        np.testing.assert_allclose(out, expected, atol=0)

    def test_identity_axis_y_columns(self):
        out = frames.cyclic_coil_frame(np.eye(3), "y")
        expected = np.column_stack([[0, 0, 1], [1, 0, 0], [0, 1, 0]])
        np.testing.assert_allclose(out, expected, atol=0)

    def test_random_rotation_columns_are_permutation(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            dcm = frames.random_rotation(rng)
            for axis in frames.AXES:
                out = frames.cyclic_coil_frame(dcm, axis)
                # column sets match and the normal lands in the third column
                in_cols = {tuple(np.round(dcm[:, i], 12)) for i in range(3)}
                out_cols = {tuple(np.round(out[:, i], 12)) for i in range(3)}
                assert in_cols == out_cols
                idx = frames.AXES.index(axis)
                np.testing.assert_allclose(out[:, 2], dcm[:, idx], atol=0)
                assert np.linalg.det(out) == pytest.approx(1.0, abs=1e-12)
                assert np.abs(out.T @ out - np.eye(3)).max() < 1e-12

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValidationError):
            frames.cyclic_coil_frame(np.eye(3) * 1.5, "z")

    def test_rejects_bad_axis(self):
        with pytest.raises(ValidationError):
            frames.cyclic_coil_frame(np.eye(3), "w")


class TestCanonicalRotation:
    def test_position_already_canonical(self):
        c = frames.canonical_rotation(np.array([1.0, 0.0, 2.0]))
        np.testing.assert_allclose(c, np.eye(3), atol=0)
        np.testing.assert_allclose(c @ [1.0, 0.0, 2.0], [1.0, 0.0, 2.0], atol=0)

    def test_quarter_turn_with_reflection(self):
        # theta0 = pi/2 and sign row -1; hand-applied matrix sends
        # [0, 1, -2] to [1, 0, 2]
        r = np.array([0.0, 1.0, -2.0])
        c = frames.canonical_rotation(r)
        expected = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
        np.testing.assert_allclose(c, expected, atol=1e-15)
        np.testing.assert_allclose(c @ r, [1.0, 0.0, 2.0], atol=1e-15)

    def test_axis_aligned_tie_break(self):
        c = frames.canonical_rotation(np.array([0.0, 0.0, 3.0]))
        np.testing.assert_allclose(c, np.eye(3), atol=0)

    def test_zero_position_rejected(self):
        with pytest.raises(ValidationError):
            frames.canonical_rotation(np.zeros(3))

    def test_property_second_zero_third_nonneg(self):
        rng = np.random.default_rng(2)
        rs = rng.normal(size=(10_000, 3))
        for r in rs:
            c = frames.canonical_rotation(r)
            out = c @ r
            assert abs(out[1]) <= 1e-12 * np.linalg.norm(r)
            assert out[2] >= 0.0
            assert out[0] == pytest.approx(np.hypot(r[0], r[1]), abs=1e-12)

    @given(vec3())
    def test_hypothesis_orthonormal(self, r):
        if not np.any(r):
            return
        c = frames.canonical_rotation(r)
        assert np.abs(c.T @ c - np.eye(3)).max() < 1e-12
        assert abs(abs(np.linalg.det(c)) - 1.0) < 1e-12


class TestCanonicalizePair:
    def test_coaxial_pair(self):
        r = np.array([0.0, 0.0, 0.5])
        canonical, ctx = frames.canonicalize_pair(
            r, np.array([0.0, 0.0, 1.0]), np.eye(3), "z", "z")
        np.testing.assert_allclose(canonical.r_hat, [0.0, 0.5], atol=1e-15)
        np.testing.assert_allclose(canonical.phi, [0.0, 0.0], atol=1e-15)
        assert ctx.axis_source == "z" and ctx.axis_target == "z"

    def test_table_initial_geometry_norm(self):
        r = np.array([0.3, -0.4, 0.6])
        canonical, _ = frames.canonicalize_pair(
            r, np.array([0.0, 0.0, 1.0]), np.eye(3), "z", "z")
        assert np.linalg.norm(canonical.r_hat) == pytest.approx(
            np.sqrt(0.61), rel=1e-12)
        assert np.linalg.norm(canonical.r_hat) == pytest.approx(0.781, abs=5e-4)

    def test_round_trip_and_ranges(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            r = rng.normal(size=3)
            r *= rng.uniform(0.3, 1.0) / np.linalg.norm(r)
            dcm_k = frames.random_rotation(rng)
            dcm_j = frames.random_rotation(rng)
            axis_s = rng.choice(frames.AXES)
            axis_t = rng.choice(frames.AXES)
            normal = frames.cyclic_coil_frame(dcm_j, axis_t)[:, 2]
            canonical, ctx = frames.canonicalize_pair(r, normal, dcm_k,
                                                      axis_s, axis_t)
            r_d = ctx.c_d_from_a @ r
            np.testing.assert_allclose(
                r_d, [canonical.r_hat[0], 0.0, canonical.r_hat[1]], atol=1e-12)
            assert -np.pi <= canonical.phi[0] <= np.pi
            assert 0.0 <= canonical.phi[1] <= np.pi
            # normal reconstructs from the spherical angles
            az, el = canonical.phi
            n_d = np.array([np.cos(az) * np.sin(el),
                            np.sin(az) * np.sin(el), np.cos(el)])
            np.testing.assert_allclose(n_d, ctx.c_d_from_a @ normal, atol=1e-10)

    def test_zero_relative_position_rejected(self):
        with pytest.raises(ValidationError):
            frames.canonicalize_pair(np.zeros(3), np.array([0.0, 0.0, 1.0]),
                                     np.eye(3), "z", "z")


class TestDecanonicalizeKernels:
    def test_identity_context_unchanged(self):
        k = GeometryKernels(i_kernel=np.array([1.0, 2.0, 3.0]),
                            j_kernel=np.array([-1.0, 0.5, 0.25]))
        ctx = frames.PairFrameContext(np.eye(3), "z", "z")
        out = frames.decanonicalize_kernels(k, ctx)
        np.testing.assert_allclose(out.i_kernel, k.i_kernel, atol=0)
        np.testing.assert_allclose(out.j_kernel, k.j_kernel, atol=0)

    def test_rotation_preserves_norms(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            k = GeometryKernels(i_kernel=rng.normal(size=3),
                                j_kernel=rng.normal(size=3))
            ctx = frames.PairFrameContext(frames.random_rotation(rng), "x", "y")
            out = frames.decanonicalize_kernels(k, ctx)
            assert np.linalg.norm(out.i_kernel) == pytest.approx(
                np.linalg.norm(k.i_kernel), rel=1e-12)
            assert np.linalg.norm(out.j_kernel) == pytest.approx(
                np.linalg.norm(k.j_kernel), rel=1e-12)

    def test_frame_equivalence_oracle(self):
        """Canonicalize -> canonical quadrature -> decanonicalize must equal
        direct quadrature in the reference frame.

        This is the authority on the reflection-sign question: the determinant
        sign lands on the force kernel, not the moment kernel.
        """
        rng = np.random.default_rng(5)
        coil = TABLE_COIL
        n_reflected = 0
        for _ in range(150):
            r, dcm_j, dcm_k = draw_admissible_pair(rng)
            axis_s = rng.choice(frames.AXES)
            axis_t = rng.choice(frames.AXES)
            src = frames.cyclic_coil_frame(dcm_k, axis_s)
            tgt = frames.cyclic_coil_frame(dcm_j, axis_t)
            direct = pair_kernel(r, src, tgt, coil, n_quad=128,
                                 min_separation=0.19)
            canonical, ctx = frames.canonicalize_pair(
                r, tgt[:, 2], dcm_k, axis_s, axis_t)
            if ctx.det < 0:
                n_reflected += 1
            r_d = np.array([canonical.r_hat[0], 0.0, canonical.r_hat[1]])
            tgt_d = frames.target_orientation_from_phi(canonical.phi)
            in_d = pair_kernel(r_d, np.eye(3), tgt_d, coil, n_quad=128,
                               min_separation=0.19)
            back = frames.decanonicalize_kernels(in_d, ctx)
            scale = max(np.abs(direct.as_column()).max(), 1e-30)
            assert np.abs(back.i_kernel - direct.i_kernel).max() <= 1e-9 * scale
            assert np.abs(back.j_kernel - direct.j_kernel).max() <= 1e-9 * scale
        # the draw must actually exercise the reflection row
        assert n_reflected > 20


class TestQuaternions:
    def test_quat_to_dcm_identity(self):
        np.testing.assert_allclose(
            frames.quat_to_dcm([0.0, 0.0, 0.0, 1.0]), np.eye(3), atol=0)

    def test_multiply_matches_dcm_product(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            q1 = frames.quat_normalize(rng.normal(size=4))
            q2 = frames.quat_normalize(rng.normal(size=4))
            lhs = frames.quat_to_dcm(frames.quat_multiply(q1, q2))
            rhs = frames.quat_to_dcm(q1) @ frames.quat_to_dcm(q2)
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_derivative_matches_dcm_rate(self):
        rng = np.random.default_rng(7)
        q = frames.quat_normalize(rng.normal(size=4))
        omega = np.array([0.3, -0.2, 0.5])
        h = 1e-6
        q_next = frames.quat_normalize(q + h * frames.quat_derivative(q, omega))
        dcm_rate_fd = (frames.quat_to_dcm(q_next) - frames.quat_to_dcm(q)) / h
        skew = np.array([[0, -omega[2], omega[1]],
                         [omega[2], 0, -omega[0]],
                         [-omega[1], omega[0], 0]])
        np.testing.assert_allclose(dcm_rate_fd, frames.quat_to_dcm(q) @ skew,
                                   atol=1e-5)

    def test_error_vector_small_angle(self):
        axis = np.array([1.0, 2.0, -1.0])
        axis /= np.linalg.norm(axis)
        angle = 1e-3
        q_ref = np.concatenate([np.sin(angle / 2) * axis, [np.cos(angle / 2)]])
        e = frames.quat_error_vector(q_ref, np.array([0.0, 0.0, 0.0, 1.0]))
        np.testing.assert_allclose(e, angle * axis, rtol=1e-6)

    def test_error_vector_sign_continuity(self):
        q = np.array([0.0, 0.0, 0.0, 1.0])
        e1 = frames.quat_error_vector(q, q)
        e2 = frames.quat_error_vector(-q, q)
        np.testing.assert_allclose(e1, e2, atol=0)
