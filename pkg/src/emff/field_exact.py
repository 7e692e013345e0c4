"""Exact near-field coil-coil interaction from the Biot-Savart double loop.

The force/torque between two circular coils is reduced to a pair of geometry
kernels per coil pair: the force kernel ``I`` (dimensionless under uniform
geometric scaling) and the moment kernel ``J`` (scales linearly with coil
radius).  Both are double loop integrals over the two circles, evaluated with
the composite trapezoid rule on the periodic domain, which converges
geometrically for separated (smooth) geometries.

Stacking the kernels of the nine source-axis/target-axis coil pairs and
dividing by the squared coil area gives the 6x9 interaction matrix ``Q`` that
maps the Kronecker product of the two satellites' body-frame dipole-moment
triples to the force and torque on the target satellite:

    [force; torque] = (mu0 / 4 pi) * Q @ kron(mu_source, mu_target)

The moment triples are ``turns * area * current`` per body axis, i.e. the
per-coil amplitudes, not reference-frame moment components; the attitude
dependence lives inside the kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from . import frames
from .errors import CoilOverlapError, NumericFault, ValidationError

MU0 = 4.0e-7 * np.pi
MU0_OVER_4PI = 1.0e-7

DEFAULT_N_QUAD = 128
SIM_N_QUAD = 64


@dataclass(frozen=True)
class CoilSpec:
    """A 3-axis set of identical circular air-core coils.

    All three loops are centered at the satellite center of mass with normals
    along the body axes.
    """

    radius: float
    turns: int

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValidationError(f"coil radius must be positive, got {self.radius}")
        if self.turns < 1:
            raise ValidationError(f"coil turns must be >= 1, got {self.turns}")

    @property
    def area(self) -> float:
        return np.pi * self.radius ** 2

    @property
    def min_separation(self) -> float:
        """Default center-distance guard: coils in contact plus 1 mm."""
        return 2.0 * self.radius + 1.0e-3

    def moment(self, currents: np.ndarray) -> np.ndarray:
        """Body-frame dipole moment triple ``turns * area * current`` [A m^2]."""
        return self.turns * self.area * np.asarray(currents, dtype=float)


@dataclass(frozen=True)
class GeometryKernels:
    """The (I, J) kernel pair for one source-coil/target-coil combination."""

    i_kernel: np.ndarray
    j_kernel: np.ndarray

    def as_column(self) -> np.ndarray:
        return np.concatenate([self.i_kernel, self.j_kernel])


@dataclass(frozen=True)
class Wrench:
    force: np.ndarray
    torque: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])

    @staticmethod
    def from_vector(w: np.ndarray) -> "Wrench":
        w = np.asarray(w, dtype=float)
        return Wrench(force=w[:3].copy(), torque=w[3:6].copy())

    @staticmethod
    def zero() -> "Wrench":
        return Wrench(force=np.zeros(3), torque=np.zeros(3))


@nb.njit(cache=True)
def _kernel_grid(r, src, tgt, radius, n):  # pragma: no cover - exercised via wrappers
    """Double periodic-trapezoid quadrature of the I, J integrals.

    ``src``/``tgt`` are coil frames (columns: in-plane u, v, normal).  The
    element separation is target point minus source point; the moment arm is
    the target point relative to the target center.  Summation order is fixed
    for bit-reproducibility.
    """
    two_pi = 2.0 * np.pi
    cs = np.cos(two_pi * np.arange(n) / n)
    sn = np.sin(two_pi * np.arange(n) / n)
    S = np.empty((n, 3))
    dS = np.empty((n, 3))
    T = np.empty((n, 3))
    dT = np.empty((n, 3))
    arm = np.empty((n, 3))
    for i in range(n):
        for a in range(3):
            S[i, a] = radius * (cs[i] * src[a, 0] + sn[i] * src[a, 1])
            dS[i, a] = radius * (-sn[i] * src[a, 0] + cs[i] * src[a, 1])
            arm[i, a] = radius * (cs[i] * tgt[a, 0] + sn[i] * tgt[a, 1])
            T[i, a] = r[a] + arm[i, a]
            dT[i, a] = radius * (-sn[i] * tgt[a, 0] + cs[i] * tgt[a, 1])
    ivec = np.zeros(3)
    jvec = np.zeros(3)
    for j in range(n):
        bx = 0.0
        by = 0.0
        bz = 0.0
        tx, ty, tz = T[j, 0], T[j, 1], T[j, 2]
        for i in range(n):
            sx = tx - S[i, 0]
            sy = ty - S[i, 1]
            sz = tz - S[i, 2]
            d2 = sx * sx + sy * sy + sz * sz
            inv = 1.0 / (d2 * np.sqrt(d2))
            ex = sx * inv
            ey = sy * inv
            ez = sz * inv
            bx += ey * dS[i, 2] - ez * dS[i, 1]
            by += ez * dS[i, 0] - ex * dS[i, 2]
            bz += ex * dS[i, 1] - ey * dS[i, 0]
        fx = by * dT[j, 2] - bz * dT[j, 1]
        fy = bz * dT[j, 0] - bx * dT[j, 2]
        fz = bx * dT[j, 1] - by * dT[j, 0]
        ivec[0] += fx
        ivec[1] += fy
        ivec[2] += fz
        ax, ay, az = arm[j, 0], arm[j, 1], arm[j, 2]
        jvec[0] += ay * fz - az * fy
        jvec[1] += az * fx - ax * fz
        jvec[2] += ax * fy - ay * fx
    w = (two_pi / n) ** 2
    return ivec * w, jvec * w


@nb.njit(cache=True)
def _min_element_separation(r, src, tgt, radius, n):  # pragma: no cover
    two_pi = 2.0 * np.pi
    cs = np.cos(two_pi * np.arange(n) / n)
    sn = np.sin(two_pi * np.arange(n) / n)
    best = 1.0e300
    for j in range(n):
        tx = r[0] + radius * (cs[j] * tgt[0, 0] + sn[j] * tgt[0, 1])
        ty = r[1] + radius * (cs[j] * tgt[1, 0] + sn[j] * tgt[1, 1])
        tz = r[2] + radius * (cs[j] * tgt[2, 0] + sn[j] * tgt[2, 1])
        for i in range(n):
            sx = tx - radius * (cs[i] * src[0, 0] + sn[i] * src[0, 1])
            sy = ty - radius * (cs[i] * src[1, 0] + sn[i] * src[1, 1])
            sz = tz - radius * (cs[i] * src[2, 0] + sn[i] * src[2, 1])
            d2 = sx * sx + sy * sy + sz * sz
            if d2 < best:
                best = d2
    return np.sqrt(best)


def min_element_separation(
    r_center: np.ndarray,
    source_orientation: np.ndarray,
    target_orientation: np.ndarray,
    coil: CoilSpec,
    n: int = 256,
) -> float:
    """Minimum distance between the two discretized coil curves."""
    return float(_min_element_separation(
        np.asarray(r_center, dtype=float),
        np.asarray(source_orientation, dtype=float),
        np.asarray(target_orientation, dtype=float),
        coil.radius, n))


def pair_kernel(
    r_center: np.ndarray,
    source_orientation: np.ndarray,
    target_orientation: np.ndarray,
    coil: CoilSpec,
    n_quad: int = DEFAULT_N_QUAD,
    min_separation: float | None = None,
) -> GeometryKernels:
    """Geometry kernels for one source-coil/target-coil pair.

    ``r_center`` is the target coil center relative to the source coil center;
    the orientation arguments are the coil frames (third column = normal).
    ``min_separation`` overrides the default center-distance guard of
    ``2 * radius + 1 mm``; callers sampling closer geometries are responsible
    for element-level admissibility (see
    :func:`min_element_separation`).
    """
    r = np.asarray(r_center, dtype=float)
    if r.shape != (3,):
        raise ValidationError(f"r_center must be a 3-vector, got shape {r.shape}")
    if n_quad < 8:
        raise ValidationError(f"n_quad must be >= 8, got {n_quad}")
    guard = coil.min_separation if min_separation is None else min_separation
    dist = np.linalg.norm(r)
    if dist <= guard:
        raise CoilOverlapError(
            f"coil center separation {dist:.4f} m is below the guard {guard:.4f} m")
    src = frames.validate_dcm(source_orientation)
    tgt = frames.validate_dcm(target_orientation)
    ivec, jvec = _kernel_grid(r, src, tgt, coil.radius, n_quad)
    if not (np.all(np.isfinite(ivec)) and np.all(np.isfinite(jvec))):
        raise NumericFault("non-finite kernel integral")
    return GeometryKernels(i_kernel=ivec, j_kernel=jvec)


def q_matrix_exact(
    r_jk: np.ndarray,
    dcm_j: np.ndarray,
    dcm_k: np.ndarray,
    coil: CoilSpec,
    n_quad: int = DEFAULT_N_QUAD,
    min_separation: float | None = None,
) -> np.ndarray:
    """6x9 interaction matrix for target satellite j and source satellite k.

    Column ``3*l + m`` holds ``[I; J] / area^2`` for source coil axis ``l`` and
    target coil axis ``m`` (axes ordered x, y, z).
    """
    q = np.empty((6, 9))
    inv_a2 = 1.0 / coil.area ** 2
    for l, axis_src in enumerate(frames.AXES):
        src = frames.cyclic_coil_frame(dcm_k, axis_src)
        for m, axis_tgt in enumerate(frames.AXES):
            tgt = frames.cyclic_coil_frame(dcm_j, axis_tgt)
            k = pair_kernel(r_jk, src, tgt, coil, n_quad, min_separation)
            q[0:3, 3 * l + m] = k.i_kernel * inv_a2
            q[3:6, 3 * l + m] = k.j_kernel * inv_a2
    return q


def pair_wrench(q: np.ndarray, mu_k: np.ndarray, mu_j: np.ndarray) -> Wrench:
    """Wrench on satellite j from satellite k for body-frame moment triples.

    ``mu_k`` (source) and ``mu_j`` (target) are ``turns * area * current`` per
    body axis; the Kronecker product is source-major to match the Q layout.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (6, 9):
        raise ValidationError(f"Q must be 6x9, got {q.shape}")
    w = MU0_OVER_4PI * q @ np.kron(np.asarray(mu_k, float), np.asarray(mu_j, float))
    return Wrench.from_vector(w)


def total_wrench(
    self_index: int,
    positions: np.ndarray,
    dcms: np.ndarray,
    moments: np.ndarray,
    coil: CoilSpec,
    n_quad: int = DEFAULT_N_QUAD,
    min_separation: float | None = None,
) -> Wrench:
    """Sum of pair wrenches on satellite ``self_index`` from all neighbors.

    ``positions`` is (n, 3) in the reference frame, ``dcms`` is (n, 3, 3) and
    ``moments`` is (n, 3) body-frame moment triples.  Neighbors are summed in
    index order (fixed-order reduction).
    """
    positions = np.asarray(positions, dtype=float)
    n_sat = positions.shape[0]
    force = np.zeros(3)
    torque = np.zeros(3)
    for k in range(n_sat):
        if k == self_index:
            continue
        r_jk = positions[self_index] - positions[k]
        q = q_matrix_exact(r_jk, dcms[self_index], dcms[k], coil, n_quad,
                           min_separation)
        w = pair_wrench(q, moments[k], moments[self_index])
        force += w.force
        torque += w.torque
    return Wrench(force=force, torque=torque)


def rescale_kernels(kernels: GeometryKernels, gamma: float) -> GeometryKernels:
    """Kernels of the gamma-scaled geometry (radius and positions both scaled).

    The force kernel is scale invariant; the moment kernel picks up one factor
    of gamma from its moment arm.
    """
    if gamma <= 0.0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    return GeometryKernels(i_kernel=kernels.i_kernel.copy(),
                           j_kernel=gamma * kernels.j_kernel)
