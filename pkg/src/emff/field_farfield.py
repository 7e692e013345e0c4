"""Point-dipole ("far-field") approximation of the coil interaction.

Valid when the separation is large compared to the coil size; the docking
comparison uses this model on the controller side to reproduce its breakdown
at close range.  The torque is the plain dipole torque ``mu x B`` with no
position-offset term.
"""

from __future__ import annotations

import numpy as np

from . import frames
from .errors import ValidationError
from .field_exact import MU0_OVER_4PI, CoilSpec, Wrench


def dipole_field(mu_k: np.ndarray, r_jk: np.ndarray) -> np.ndarray:
    """Magnetic field of dipole ``mu_k`` at relative position ``r_jk`` [T]."""
    mu_k = np.asarray(mu_k, dtype=float)
    r = np.asarray(r_jk, dtype=float)
    d = np.linalg.norm(r)
    if d == 0.0:
        raise ValidationError("field point coincides with the dipole")
    e_r = r / d
    m_k = mu_k @ e_r
    return MU0_OVER_4PI / d ** 3 * (3.0 * m_k * e_r - mu_k)


def farfield_wrench(mu_j: np.ndarray, mu_k: np.ndarray, r_jk: np.ndarray) -> Wrench:
    """Dipole-dipole force and torque on agent j from agent k.

    Moments are reference-frame vectors here (the dipole abstraction has no
    body axes).  ``r_jk`` points from k to j.
    """
    mu_j = np.asarray(mu_j, dtype=float)
    mu_k = np.asarray(mu_k, dtype=float)
    r = np.asarray(r_jk, dtype=float)
    d = np.linalg.norm(r)
    if d == 0.0:
        raise ValidationError("coincident dipoles")
    e_r = r / d
    m_k = mu_k @ e_r
    m_j = mu_j @ e_r
    force = 3.0 * MU0_OVER_4PI / d ** 4 * (
        (mu_k @ mu_j - 5.0 * m_k * m_j) * e_r + m_k * mu_j + m_j * mu_k)
    torque = np.cross(mu_j, dipole_field(mu_k, r))
    return Wrench(force=force, torque=torque)


def q_matrix_farfield(
    r_jk: np.ndarray,
    dcm_j: np.ndarray,
    dcm_k: np.ndarray,
    coil: CoilSpec,
) -> np.ndarray:
    """Far-field 6x9 matrix with the same layout and units as the exact one.

    Built by evaluating the bilinear wrench map on the nine body-axis basis
    pairs, so the allocation path can run unchanged against either model.
    The ``coil`` argument fixes nothing here beyond signature parity; the
    moment scaling lives in the Kronecker vector exactly as for the exact Q.
    """
    r = np.asarray(r_jk, dtype=float)
    if np.linalg.norm(r) == 0.0:
        raise ValidationError("zero relative position")
    dcm_j = frames.validate_dcm(dcm_j)
    dcm_k = frames.validate_dcm(dcm_k)
    q = np.empty((6, 9))
    for l in range(3):
        n_k = dcm_k[:, l]
        for m in range(3):
            n_j = dcm_j[:, m]
            w = farfield_wrench(n_j, n_k, r)
            q[:, 3 * l + m] = w.as_vector() / MU0_OVER_4PI
    return q
