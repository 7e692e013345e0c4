"""Shared fixtures and geometry samplers for the test suite."""

import numpy as np
import pytest

from emff import frames
from emff.field_exact import CoilSpec, min_element_separation

TABLE_COIL = CoilSpec(radius=0.15, turns=100)

# element-level admissibility guard used by all random-geometry draws; at this
# curve-to-curve clearance the n=128 trapezoid rule is converged to ~1e-9
MIN_ELEMENT_SEP = 0.02


@pytest.fixture
def coil():
    return TABLE_COIL


def draw_admissible_pair(rng, coil=TABLE_COIL, r_min=0.2, r_max=1.0,
                         min_sep=MIN_ELEMENT_SEP):
    """Random satellite pair whose nine coil pairs are all admissible.

    Returns (r_jk, dcm_j, dcm_k).  Rejection-samples orientations until every
    coil-pair curve separation exceeds ``min_sep``.
    """
    while True:
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        r = direction * rng.uniform(r_min, r_max)
        dcm_j = frames.random_rotation(rng)
        dcm_k = frames.random_rotation(rng)
        ok = True
        for axis_s in frames.AXES:
            src = frames.cyclic_coil_frame(dcm_k, axis_s)
            for axis_t in frames.AXES:
                tgt = frames.cyclic_coil_frame(dcm_j, axis_t)
                if min_element_separation(r, src, tgt, coil, n=128) < min_sep:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return r, dcm_j, dcm_k


def draw_admissible_single(rng, coil=TABLE_COIL, r_min=0.2, r_max=1.0,
                           min_sep=MIN_ELEMENT_SEP):
    """Random single coil pair (r, src_orientation, tgt_orientation)."""
    while True:
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        r = direction * rng.uniform(r_min, r_max)
        src = frames.random_rotation(rng)
        tgt = frames.random_rotation(rng)
        if min_element_separation(r, src, tgt, coil, n=128) >= min_sep:
            return r, src, tgt
