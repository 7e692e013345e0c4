"""Sampling of the canonical input space and kernel-label generation.

Samples live directly in the reduced coordinates: separation norm uniform in
[r_min, r_max], polar angle of the (in-plane, axial) position uniform in
[0, pi/2], target-normal azimuth uniform in [-pi, pi] and elevation uniform in
[0, pi].  Draws whose coil curves come closer than the element-separation
guard are rejected and redrawn, which keeps the trapezoid-rule labels
converged; the guard is what admits sampling below the strict
``2 * coil_radius`` center-distance bound.

Labels are the six kernel components [I; J] evaluated in the canonical frame
(source coil in the x-y plane, target center in the x-z half plane).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import frames
from .errors import ConfigError, ValidationError
from .field_exact import CoilSpec, min_element_separation, pair_kernel

DEFAULT_MIN_ELEMENT_SEP = 0.02
DEFAULT_LABEL_N_QUAD = 128

_DATASET_MAGIC = b"EMFFDS01"
_DATASET_VERSION = 1


@dataclass(frozen=True)
class SampleRegion:
    """Admissible canonical positions for training and inference.

    Separations at or below ``2 * coil_radius`` (coils able to touch) are only
    admitted when an element-separation guard is set; without the guard the
    region must respect the strict center-distance bound.
    """

    r_min: float
    r_max: float
    coil_radius: float
    min_element_separation: float | None = DEFAULT_MIN_ELEMENT_SEP

    def __post_init__(self):
        if self.coil_radius <= 0.0:
            raise ConfigError("coil_radius must be positive")
        if not 0.0 < self.r_min <= self.r_max:
            raise ConfigError("need 0 < r_min <= r_max")
        if self.r_min <= 2.0 * self.coil_radius:
            if self.min_element_separation is None:
                raise ConfigError(
                    f"r_min={self.r_min} does not exceed 2*coil_radius="
                    f"{2 * self.coil_radius}; an element-separation guard is "
                    "required to sample that close")
            if self.min_element_separation <= 0.0:
                raise ConfigError("min_element_separation must be positive")

    def contains(self, separation: float) -> bool:
        return self.r_min <= separation <= self.r_max


DESK_REGION = SampleRegion(r_min=0.2, r_max=1.0, coil_radius=0.15)


@dataclass
class Dataset:
    """Stacked canonical inputs (N, 4) and kernel labels (N, 6)."""

    inputs: np.ndarray
    labels: np.ndarray
    region: SampleRegion
    n_quad: int

    def __len__(self) -> int:
        return self.inputs.shape[0]


def canonical_geometry(row: np.ndarray):
    """Relative position and target coil frame for one canonical input row."""
    rho, zeta = float(row[0]), float(row[1])
    r_d = np.array([rho, 0.0, zeta])
    tgt = frames.target_orientation_from_phi(row[2:4])
    return r_d, tgt


def label_for_input(row: np.ndarray, coil_radius: float,
                    n_quad: int = DEFAULT_LABEL_N_QUAD) -> np.ndarray:
    """Kernel label [I; J] for a canonical input row, by direct quadrature."""
    r_d, tgt = canonical_geometry(row)
    coil = CoilSpec(radius=coil_radius, turns=1)
    k = pair_kernel(r_d, np.eye(3), tgt, coil, n_quad=n_quad,
                    min_separation=0.5 * np.linalg.norm(r_d))
    return k.as_column()


def sample_dataset(region: SampleRegion, n_samples: int,
                   n_quad: int = DEFAULT_LABEL_N_QUAD, seed: int = 0) -> Dataset:
    """Deterministically sample inputs and compute labels by quadrature."""
    if n_samples < 0:
        raise ValidationError("n_samples must be non-negative")
    coil = CoilSpec(radius=region.coil_radius, turns=1)
    guard = region.min_element_separation or 0.0
    rng = np.random.default_rng(seed)
    inputs = np.empty((n_samples, 4))
    labels = np.empty((n_samples, 6))
    identity = np.eye(3)
    count = 0
    while count < n_samples:
        sep = rng.uniform(region.r_min, region.r_max)
        alpha = rng.uniform(0.0, 0.5 * np.pi)
        azimuth = rng.uniform(-np.pi, np.pi)
        elevation = rng.uniform(0.0, np.pi)
        row = np.array([sep * np.sin(alpha), sep * np.cos(alpha),
                        azimuth, elevation])
        r_d, tgt = canonical_geometry(row)
        if guard and min_element_separation(r_d, identity, tgt, coil,
                                            n=128) < guard:
            continue
        k = pair_kernel(r_d, identity, tgt, coil, n_quad=n_quad,
                        min_separation=0.5 * sep)
        inputs[count] = row
        labels[count] = k.as_column()
        count += 1
    return Dataset(inputs=inputs, labels=labels, region=region, n_quad=n_quad)


def save_dataset(path, ds: Dataset) -> None:
    """Binary columnar dump; bit-exact round trip with :func:`load_dataset`."""
    guard = ds.region.min_element_separation
    header = struct.pack(
        "<8sIQI4d",
        _DATASET_MAGIC, _DATASET_VERSION, len(ds), ds.n_quad,
        ds.region.r_min, ds.region.r_max, ds.region.coil_radius,
        -1.0 if guard is None else guard,
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(ds.inputs, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(ds.labels, dtype="<f8").tobytes())


def load_dataset(path) -> Dataset:
    with open(path, "rb") as f:
        head = f.read(struct.calcsize("<8sIQI4d"))
        magic, version, n, n_quad, r_min, r_max, radius, guard = struct.unpack(
            "<8sIQI4d", head)
        if magic != _DATASET_MAGIC:
            raise ValidationError(f"not a dataset file: bad magic {magic!r}")
        if version != _DATASET_VERSION:
            raise ValidationError(f"unsupported dataset version {version}")
        inputs = np.frombuffer(f.read(n * 4 * 8), dtype="<f8").reshape(n, 4)
        labels = np.frombuffer(f.read(n * 6 * 8), dtype="<f8").reshape(n, 6)
    region = SampleRegion(r_min=r_min, r_max=r_max, coil_radius=radius,
                          min_element_separation=None if guard < 0 else guard)
    return Dataset(inputs=inputs.copy(), labels=labels.copy(),
                   region=region, n_quad=n_quad)
