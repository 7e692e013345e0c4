"""Coordinate conventions and the canonical-frame reduction for coil pairs.

Conventions used throughout the package:

* A direction cosine matrix ("dcm") ``C`` holds the body axes as columns, so
  it maps body-frame components to reference-frame components: ``v_ref = C @
  v_body``.  Rotations have determinant +1; the canonical-frame transform below
  is the one place a reflection (determinant -1) is allowed.
* Quaternions are scalar-last ``[x, y, z, w]`` and encode the same body-to-
  reference rotation: ``quat_to_dcm(q) @ v_body = v_ref``.
* Each satellite carries three circular coils whose normals are the body x, y,
  z axes.  The coil for axis ``w`` is parameterized in the frame returned by
  :func:`cyclic_coil_frame`, whose third column is the coil normal and whose
  first two columns span the coil plane (right handed).

The canonical ("D") frame places the source coil in the x-y plane with the
relative position rotated into the x-z half plane (second component zero,
third component non-negative).  That reduces a coil pair to four numbers: the
in-plane and axial position components plus the azimuth/elevation of the
target coil normal.  The reduction halves the position space using a
reflection row; the empirically validated inverse transform is
:func:`decanonicalize_kernels`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

AXES = ("x", "y", "z")

# column order of the coil frame for each coil axis: third column is the
# coil normal and the triple stays a cyclic (proper) permutation
_CYCLIC_COLUMNS = {"x": (1, 2, 0), "y": (2, 0, 1), "z": (0, 1, 2)}


@dataclass(frozen=True)
class CanonicalInput:
    """Reduced 4-number description of a coil pair in the canonical frame.

    ``r_hat`` holds the in-plane and axial components of the relative position
    (meters); ``phi`` holds the azimuth in [-pi, pi] and elevation in [0, pi]
    of the target coil normal (radians).
    """

    r_hat: np.ndarray
    phi: np.ndarray

    def as_row(self) -> np.ndarray:
        return np.concatenate([self.r_hat, self.phi])


@dataclass(frozen=True)
class PairFrameContext:
    """Transform context produced alongside a :class:`CanonicalInput`.

    ``c_d_from_a`` is the full composed transform from the reference frame A
    into the canonical frame D (orthonormal, determinant +/-1).
    """

    c_d_from_a: np.ndarray
    axis_source: str
    axis_target: str

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.c_d_from_a))


def validate_dcm(dcm: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Check that ``dcm`` is a 3x3 orthonormal matrix and return it as float64."""
    dcm = np.asarray(dcm, dtype=float)
    if dcm.shape != (3, 3):
        raise ValidationError(f"dcm must be 3x3, got shape {dcm.shape}")
    residual = np.abs(dcm.T @ dcm - np.eye(3)).max()
    if residual > tol:
        raise ValidationError(f"dcm is not orthonormal (residual {residual:.2e})")
    return dcm


def cyclic_coil_frame(body_dcm: np.ndarray, axis: str) -> np.ndarray:
    """Coil frame for the coil wound about body axis ``axis``.

    The returned matrix has the coil normal as its third column; the column
    triple is the cyclic permutation (y,z,x) for axis x, (z,x,y) for axis y
    and the identity order for axis z, so the result is always a proper
    rotation when ``body_dcm`` is one.
    """
    body_dcm = validate_dcm(body_dcm)
    try:
        cols = _CYCLIC_COLUMNS[axis]
    except KeyError:
        raise ValidationError(f"axis must be one of {AXES}, got {axis!r}") from None
    return body_dcm[:, cols]


def canonical_rotation(r_in_coil_frame: np.ndarray) -> np.ndarray:
    """Rotation (with optional reflection row) into the canonical frame.

    Given the relative position expressed in the source coil frame, build the
    transform that zeroes its second component and makes the third component
    non-negative.  ``theta0 = atan2(r_y, r_x)`` with the documented tie-break
    ``theta0 = 0`` when the in-plane part vanishes; the third row carries
    ``sign(r_z)`` (+1 at ``r_z = 0``), which is the half-space reduction.
    """
    r = np.asarray(r_in_coil_frame, dtype=float)
    if r.shape != (3,):
        raise ValidationError(f"expected a 3-vector, got shape {r.shape}")
    if not np.any(r):
        raise ValidationError("relative position must be nonzero")
    if np.hypot(r[0], r[1]) > 0.0:
        theta0 = np.arctan2(r[1], r[0])
    else:
        theta0 = 0.0
    sgn = 1.0 if r[2] >= 0.0 else -1.0
    c, s = np.cos(theta0), np.sin(theta0)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, sgn]])


def canonicalize_pair(
    r_jk_in_a: np.ndarray,
    target_normal_in_a: np.ndarray,
    source_body_dcm: np.ndarray,
    source_axis: str,
    target_axis: str,
) -> tuple[CanonicalInput, PairFrameContext]:
    """Reduce a source/target coil pair to its canonical 4-number input.

    ``r_jk_in_a`` is the target-center position relative to the source center,
    in reference-frame components.  ``target_normal_in_a`` is the unit normal
    of the target coil.  The source coil is identified by ``source_body_dcm``
    plus ``source_axis``.
    """
    r_a = np.asarray(r_jk_in_a, dtype=float)
    n_a = np.asarray(target_normal_in_a, dtype=float)
    if not np.any(r_a):
        raise ValidationError("relative position must be nonzero")
    n_norm = np.linalg.norm(n_a)
    if abs(n_norm - 1.0) > 1e-9:
        raise ValidationError(f"target normal must be unit length, got |n|={n_norm}")

    c_a_from_b = cyclic_coil_frame(source_body_dcm, source_axis)
    r_b = c_a_from_b.T @ r_a
    c_d_from_b = canonical_rotation(r_b)
    c_d_from_a = c_d_from_b @ c_a_from_b.T

    r_d = c_d_from_a @ r_a
    n_d = c_d_from_a @ n_a
    if np.hypot(n_d[0], n_d[1]) > 0.0:
        azimuth = np.arctan2(n_d[1], n_d[0])
    else:
        azimuth = 0.0
    elevation = np.arccos(np.clip(n_d[2], -1.0, 1.0))

    canonical = CanonicalInput(
        r_hat=np.array([r_d[0], r_d[2]]),
        phi=np.array([azimuth, elevation]),
    )
    ctx = PairFrameContext(c_d_from_a=c_d_from_a, axis_source=source_axis,
                           axis_target=target_axis)
    return canonical, ctx


def target_orientation_from_phi(phi: np.ndarray) -> np.ndarray:
    """Right-handed coil frame in canonical components for spherical angles ``phi``.

    The third column is the target normal ``[cos(a) sin(e), sin(a) sin(e),
    cos(e)]``; the in-plane columns are an arbitrary completion (the kernel
    integrals over the full circle do not depend on that choice).
    """
    azimuth, elevation = float(phi[0]), float(phi[1])
    se, ce = np.sin(elevation), np.cos(elevation)
    ca, sa = np.cos(azimuth), np.sin(azimuth)
    n = np.array([ca * se, sa * se, ce])
    u = np.array([-sa, ca, 0.0]) if se > 1e-12 else np.array([1.0, 0.0, 0.0])
    v = np.cross(n, u)
    return np.column_stack([u, v, n])


def decanonicalize_kernels(kernels_in_d, ctx: PairFrameContext):
    """Map canonical-frame geometry kernels back into reference-frame components.

    When the context carries the reflection row (determinant -1) the canonical
    evaluation differs from a plain passive transform: the reflected target
    circle winds left-handed about its normal, which flips the sign of the
    force kernel while the extra moment-arm cross product restores the torque
    kernel.  The empirically validated inverse is therefore ``I_a = det *
    C^T I_d`` and ``J_a = C^T J_d`` (see the frame-equivalence tests).
    """
    c = validate_dcm(ctx.c_d_from_a)
    sigma = 1.0 if np.linalg.det(c) > 0.0 else -1.0
    return dataclasses.replace(
        kernels_in_d,
        i_kernel=sigma * (c.T @ kernels_in_d.i_kernel),
        j_kernel=c.T @ kernels_in_d.j_kernel,
    )


# --------------------------------------------------------------------------
# quaternion helpers (scalar-last, body-to-reference)

def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValidationError("zero quaternion")
    return q / n


def quat_to_dcm(q: np.ndarray) -> np.ndarray:
    """Rotation matrix mapping body components to reference components."""
    x, y, z, w = quat_normalize(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def quat_multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Hamilton product ``q1 * q2`` (both scalar-last)."""
    v1, w1 = np.asarray(q1[:3], dtype=float), float(q1[3])
    v2, w2 = np.asarray(q2[:3], dtype=float), float(q2[3])
    v = w1 * v2 + w2 * v1 + np.cross(v1, v2)
    w = w1 * w2 - v1 @ v2
    return np.concatenate([v, [w]])


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.array([-q[0], -q[1], -q[2], q[3]])


def quat_derivative(q: np.ndarray, omega_body: np.ndarray) -> np.ndarray:
    """Kinematics ``q_dot = 0.5 * q * [omega, 0]`` for body angular rate."""
    return 0.5 * quat_multiply(q, np.concatenate([omega_body, [0.0]]))


def quat_error_vector(q_ref: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Small-angle attitude error vector (body frame) from ``q`` to ``q_ref``.

    Twice the vector part of the error quaternion with the scalar-part sign
    folded in, so small errors equal the rotation vector and the map stays
    continuous across the double cover.
    """
    q_err = quat_multiply(quat_conjugate(q), q_ref)
    sign = 1.0 if q_err[3] >= 0.0 else -1.0
    return 2.0 * sign * q_err[:3]


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly random proper rotation (QR of a Gaussian matrix, det fixed)."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0.0:
        q[:, 0] = -q[:, 0]
    return q
