"""Electromagnetic formation flight: exact coil interaction models, a neural
surrogate of the geometry kernels, and a decentralized docking simulation."""

from .field_exact import (
    CoilSpec,
    GeometryKernels,
    Wrench,
    pair_kernel,
    pair_wrench,
    q_matrix_exact,
    rescale_kernels,
    total_wrench,
)
from .field_farfield import dipole_field, farfield_wrench, q_matrix_farfield
from .frames import (
    CanonicalInput,
    PairFrameContext,
    canonical_rotation,
    canonicalize_pair,
    cyclic_coil_frame,
    decanonicalize_kernels,
)

__all__ = [
    "CanonicalInput",
    "CoilSpec",
    "GeometryKernels",
    "PairFrameContext",
    "Wrench",
    "canonical_rotation",
    "canonicalize_pair",
    "cyclic_coil_frame",
    "decanonicalize_kernels",
    "dipole_field",
    "farfield_wrench",
    "pair_kernel",
    "pair_wrench",
    "q_matrix_exact",
    "q_matrix_farfield",
    "rescale_kernels",
    "total_wrench",
]

__version__ = "0.1.0"
