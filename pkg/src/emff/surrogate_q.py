"""Trained-surrogate packaging, model file format, and the online Q path.

The online path mirrors the exact assembly: for each source coil axis build
the canonical frame, query the network for the canonical kernels of the three
target axes, undo the radius scaling, rotate the kernels back (with the
reflection sign rule on the force kernel) and stack the 6x9 matrix.

A surrogate trained at one coil radius serves any geometrically similar coil:
positions are divided by the radius ratio ``gamma`` before the query and the
moment-kernel rows are multiplied by ``gamma`` afterwards.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from . import mlp
from .dataset import DEFAULT_LABEL_N_QUAD, Dataset, SampleRegion
from .errors import ValidationError
from .field_exact import CoilSpec
from .frames import AXES, _CYCLIC_COLUMNS
from .mlp import MlpParams

_MODEL_MAGIC = b"EMFFMLP1"
_MODEL_VERSION = 1

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_LN_EPS = 1e-5


class _InferenceNet:
    """Forward pass with standardization folded into the first and last affine
    layers; shaves constant overhead off the per-call cost."""

    def __init__(self, params: MlpParams):
        w = [a.copy() for a in params.weights]
        b = [a.copy() for a in params.biases]
        w[0] = w[0] / params.x_scale[:, None]
        b[0] = b[0] - (params.x_mean / params.x_scale) @ params.weights[0]
        w[-1] = w[-1] * params.y_scale[None, :]
        b[-1] = b[-1] * params.y_scale + params.y_mean
        self.weights = w
        self.biases = b
        self.ln_gain = [g.copy() for g in params.ln_gain]
        self.ln_bias = [g.copy() for g in params.ln_bias]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        h = x
        for i in range(len(self.ln_gain)):
            z = h @ self.weights[i]
            z += self.biases[i]
            mu = z.mean(axis=1, keepdims=True)
            z -= mu
            var = (z * z).mean(axis=1, keepdims=True)
            z *= 1.0 / np.sqrt(var + _LN_EPS)
            z *= self.ln_gain[i]
            z += self.ln_bias[i]
            h = 0.5 * z * (1.0 + erf(z * _INV_SQRT2))
        return h @ self.weights[-1] + self.biases[-1]


@dataclass
class SurrogateModel:
    """Trained kernel regressor plus the region it is valid on."""

    params: MlpParams
    region: SampleRegion
    label_n_quad: int = DEFAULT_LABEL_N_QUAD
    _net: _InferenceNet | None = field(default=None, repr=False, compare=False)

    @property
    def net(self) -> _InferenceNet:
        if self._net is None:
            self._net = _InferenceNet(self.params)
        return self._net


def train_surrogate(ds: Dataset, config: TrainConfig, callback=None):
    """Train the kernel network on a sampled dataset."""
    params, report = mlp.train_mlp(ds.inputs, ds.labels, config, callback)
    return SurrogateModel(params=params, region=ds.region,
                          label_n_quad=ds.n_quad), report


def q_matrix_surrogate(
    r_jk: np.ndarray,
    dcm_j: np.ndarray,
    dcm_k: np.ndarray,
    coil: CoilSpec,
    model: SurrogateModel,
    out_of_region: str = "warn",
) -> np.ndarray:
    """Surrogate 6x9 interaction matrix (same layout as the exact assembly).

    ``out_of_region`` controls what happens when the gamma-reduced separation
    leaves the trained region: "warn" (default) emits
    :class:`~emff.errors.ExtrapolationWarning` and still returns the value,
    "raise" turns it into an error, "ignore" stays silent.
    """
    r = np.asarray(r_jk, dtype=float)
    gamma = coil.radius / model.region.coil_radius
    sep = np.linalg.norm(r) / gamma
    if not model.region.contains(sep):
        message = (f"separation {sep:.4f} m (after radius scaling) is outside "
                   f"the trained region [{model.region.r_min}, "
                   f"{model.region.r_max}] m")
        if out_of_region == "raise":
            raise ValidationError(message)
        if out_of_region == "warn":
            from .errors import ExtrapolationWarning
            warnings.warn(message, ExtrapolationWarning, stacklevel=2)

    dcm_j = np.asarray(dcm_j, dtype=float)
    dcm_k = np.asarray(dcm_k, dtype=float)
    x = np.empty((9, 4))
    contexts = []
    for l, axis in enumerate(AXES):
        src = dcm_k[:, _CYCLIC_COLUMNS[axis]]
        r_b = src.T @ r
        rho = np.hypot(r_b[0], r_b[1])
        theta0 = np.arctan2(r_b[1], r_b[0]) if rho > 0.0 else 0.0
        sgn = 1.0 if r_b[2] >= 0.0 else -1.0
        ct, st = np.cos(theta0), np.sin(theta0)
        c_db = np.array([[ct, st, 0.0], [-st, ct, 0.0], [0.0, 0.0, sgn]])
        c_da = c_db @ src.T
        contexts.append((c_da, sgn))
        n_d = c_da @ dcm_j  # columns: target normals for axes x, y, z
        zeta = abs(r_b[2])
        for m in range(3):
            nx, ny, nz = n_d[0, m], n_d[1, m], n_d[2, m]
            azimuth = np.arctan2(ny, nx) if (nx != 0.0 or ny != 0.0) else 0.0
            elevation = np.arccos(min(1.0, max(-1.0, nz)))
            x[3 * l + m] = (rho / gamma, zeta / gamma, azimuth, elevation)

    y = model.net(x)
    q = np.empty((6, 9))
    inv_a2 = 1.0 / coil.area ** 2
    for l in range(3):
        c_da, sgn = contexts[l]
        block = y[3 * l:3 * l + 3]
        # reflection sign rule: determinant sign on the force kernel only
        q[0:3, 3 * l:3 * l + 3] = (sgn * inv_a2) * (c_da.T @ block[:, 0:3].T)
        q[3:6, 3 * l:3 * l + 3] = (gamma * inv_a2) * (c_da.T @ block[:, 3:6].T)
    return q


def save_model(path, model: SurrogateModel) -> None:
    """Versioned binary dump: header, standardization, then layer arrays."""
    p = model.params
    guard = model.region.min_element_separation
    with open(path, "wb") as f:
        f.write(struct.pack("<8sII", _MODEL_MAGIC, _MODEL_VERSION,
                            len(p.sizes)))
        f.write(struct.pack(f"<{len(p.sizes)}I", *p.sizes))
        f.write(struct.pack("<4dI", model.region.r_min, model.region.r_max,
                            model.region.coil_radius,
                            -1.0 if guard is None else guard,
                            model.label_n_quad))
        for arr in (p.x_mean, p.x_scale, p.y_mean, p.y_scale):
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        for w, b in zip(p.weights, p.biases):
            f.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(b, dtype="<f8").tobytes())
        for g, b in zip(p.ln_gain, p.ln_bias):
            f.write(np.ascontiguousarray(g, dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_model(path) -> SurrogateModel:
    with open(path, "rb") as f:
        magic, version, n_sizes = struct.unpack("<8sII",
                                                f.read(struct.calcsize("<8sII")))
        if magic != _MODEL_MAGIC:
            raise ValidationError(f"not a model file: bad magic {magic!r}")
        if version != _MODEL_VERSION:
            raise ValidationError(f"unsupported model version {version}")
        sizes = struct.unpack(f"<{n_sizes}I", f.read(4 * n_sizes))
        r_min, r_max, radius, guard, n_quad = struct.unpack(
            "<4dI", f.read(struct.calcsize("<4dI")))

        def read_array(*shape):
            n = int(np.prod(shape))
            return np.frombuffer(f.read(n * 8), dtype="<f8").reshape(shape).copy()

        x_mean = read_array(sizes[0])
        x_scale = read_array(sizes[0])
        y_mean = read_array(sizes[-1])
        y_scale = read_array(sizes[-1])
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            weights.append(read_array(fan_in, fan_out))
            biases.append(read_array(fan_out))
        ln_gain, ln_bias = [], []
        for i in range(len(sizes) - 2):
            ln_gain.append(read_array(sizes[i + 1]))
            ln_bias.append(read_array(sizes[i + 1]))
    params = MlpParams(sizes=tuple(sizes), weights=weights, biases=biases,
                       ln_gain=ln_gain, ln_bias=ln_bias,
                       x_mean=x_mean, x_scale=x_scale,
                       y_mean=y_mean, y_scale=y_scale)
    region = SampleRegion(r_min=r_min, r_max=r_max, coil_radius=radius,
                          min_element_separation=None if guard < 0 else guard)
    return SurrogateModel(params=params, region=region, label_n_quad=n_quad)
