"""Relative orbital motion, attitude dynamics with a reaction wheel, and RK4.

The translational state is the chaser-minus-target relative position/velocity
in the orbital (CW) frame of a circular orbit.  Attitudes of both satellites
are propagated as scalar-last quaternions with body angular rates; only the
target carries a reaction wheel.  External wrenches are held constant in the
reference frame over an integration interval (zero-order hold at the control
rate); body torques are re-resolved from the current attitude inside the
derivative, so the hold is physical.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import frames
from .errors import NumericFault, ValidationError
from .field_exact import Wrench

EARTH_MU = 3.986004418e14     # m^3/s^2
EARTH_RADIUS = 6378.137e3     # m

# state vector layout: rel_pos(3), rel_vel(3), q1(4), w1(3), q2(4), w2(3), h_rw(3)
_STATE_SIZE = 23


def _default_inertia() -> np.ndarray:
    # not stated in the reference tables; homogeneous-cube scale for a 20 kg
    # satellite of ~0.3 m size
    return np.diag([0.3, 0.3, 0.3])


@dataclass(frozen=True)
class PlantConfig:
    mass_chaser: float = 20.0
    mass_target: float = 20.0
    inertia_chaser: np.ndarray = field(default_factory=_default_inertia)
    inertia_target: np.ndarray = field(default_factory=_default_inertia)
    altitude: float = 700e3
    mu_g: float = EARTH_MU
    relative_forcing: bool = True
    """Subtract the target's reaction from the CW forcing (physically complete
    relative form).  False reproduces the chaser-only forcing of the reference
    equations."""

    def __post_init__(self):
        if self.mass_chaser <= 0.0 or self.mass_target <= 0.0:
            raise ValidationError("masses must be positive")
        for inertia in (self.inertia_chaser, self.inertia_target):
            j = np.asarray(inertia, dtype=float)
            if j.shape != (3, 3) or np.abs(j - j.T).max() > 1e-12:
                raise ValidationError("inertia must be symmetric 3x3")
            if np.any(np.linalg.eigvalsh(j) <= 0.0):
                raise ValidationError("inertia must be positive definite")

    @property
    def effective_mass(self) -> float:
        """Mass seen by the relative dynamics under mutual forcing."""
        if self.relative_forcing:
            return 1.0 / (1.0 / self.mass_chaser + 1.0 / self.mass_target)
        return self.mass_chaser


@dataclass
class SatelliteState:
    """Joint state of the target (1) / chaser (2) pair."""

    rel_pos: np.ndarray
    rel_vel: np.ndarray
    quat_target: np.ndarray
    omega_target: np.ndarray
    quat_chaser: np.ndarray
    omega_chaser: np.ndarray
    h_rw: np.ndarray

    @staticmethod
    def table_initial() -> "SatelliteState":
        """Initial conditions of the nominal docking scenario."""
        return SatelliteState(
            rel_pos=np.array([0.3, -0.4, 0.6]),
            rel_vel=np.zeros(3),
            quat_target=np.array([0.0, 0.0, 0.0, 1.0]),
            omega_target=np.array([0.01, 0.02, 0.08]),
            quat_chaser=np.array([0.0, 0.0, 0.0, 1.0]),
            omega_chaser=np.array([1e-4, 2e-4, 8e-4]),
            h_rw=np.zeros(3),
        )

    def pack(self) -> np.ndarray:
        return np.concatenate([
            self.rel_pos, self.rel_vel, self.quat_target, self.omega_target,
            self.quat_chaser, self.omega_chaser, self.h_rw])

    @staticmethod
    def unpack(x: np.ndarray) -> "SatelliteState":
        return SatelliteState(
            rel_pos=x[0:3].copy(), rel_vel=x[3:6].copy(),
            quat_target=x[6:10].copy(), omega_target=x[10:13].copy(),
            quat_chaser=x[13:17].copy(), omega_chaser=x[17:20].copy(),
            h_rw=x[20:23].copy())

    def copy(self) -> "SatelliteState":
        return SatelliteState.unpack(self.pack())


def orbital_rate(cfg: PlantConfig) -> float:
    """Mean motion of the circular reference orbit [rad/s]."""
    if cfg.altitude < 0.0:
        raise ValidationError("altitude must be non-negative")
    r_o = EARTH_RADIUS + cfg.altitude
    return float(np.sqrt(cfg.mu_g / r_o**3))


def cw_derivative(rel_pos: np.ndarray, rel_vel: np.ndarray,
                  force_on_chaser: np.ndarray, force_on_target: np.ndarray,
                  cfg: PlantConfig, omega_o: float):
    """Right-hand side of the relative-motion equations.

    Sign convention of the reference equations: ``x'' + 2 w y' - 3 w^2 x =
    Fx/m``, ``y'' - 2 w x' = Fy/m``, ``z'' + w^2 z = Fz/m``.
    """
    if cfg.relative_forcing:
        accel = (np.asarray(force_on_chaser, float) / cfg.mass_chaser
                 - np.asarray(force_on_target, float) / cfg.mass_target)
    else:
        accel = np.asarray(force_on_chaser, float) / cfg.mass_chaser
    x, y, z = rel_pos
    vx, vy, vz = rel_vel
    return rel_vel.copy(), np.array([
        accel[0] - 2.0 * omega_o * vy + 3.0 * omega_o**2 * x,
        accel[1] + 2.0 * omega_o * vx,
        accel[2] - omega_o**2 * z,
    ])


def attitude_derivative(quat: np.ndarray, omega: np.ndarray, h_rw: np.ndarray,
                        tau_ext_body: np.ndarray, tau_rw: np.ndarray,
                        inertia: np.ndarray):
    """Quaternion kinematics and wheel-coupled Euler dynamics (body frame).

    ``J w' + w x (J w + h_rw) = -tau_rw + tau_ext`` and ``h_rw' = tau_rw``.
    """
    inertia = np.asarray(inertia, dtype=float)
    j_omega = inertia @ omega
    gyro = np.cross(omega, j_omega + h_rw)
    omega_dot = np.linalg.solve(inertia, -gyro - tau_rw + tau_ext_body)
    q_dot = frames.quat_derivative(quat, omega)
    return q_dot, omega_dot, np.asarray(tau_rw, dtype=float).copy()


@dataclass(frozen=True)
class HeldWrenches:
    """Reference-frame wrenches and body-frame RW torque held over a step."""

    on_chaser: Wrench
    on_target: Wrench
    tau_rw: np.ndarray

    @staticmethod
    def zero() -> "HeldWrenches":
        return HeldWrenches(Wrench.zero(), Wrench.zero(), np.zeros(3))


def _state_derivative(x: np.ndarray, held: HeldWrenches, cfg: PlantConfig,
                      omega_o: float) -> np.ndarray:
    s = SatelliteState.unpack(x)
    dpos, dvel = cw_derivative(s.rel_pos, s.rel_vel, held.on_chaser.force,
                               held.on_target.force, cfg, omega_o)
    # torques arrive in the reference frame; resolve into the current bodies
    c_t = frames.quat_to_dcm(s.quat_target)
    c_c = frames.quat_to_dcm(s.quat_chaser)
    dq1, dw1, dh = attitude_derivative(
        s.quat_target, s.omega_target, s.h_rw,
        c_t.T @ held.on_target.torque, held.tau_rw, cfg.inertia_target)
    dq2, dw2, _ = attitude_derivative(
        s.quat_chaser, s.omega_chaser, np.zeros(3),
        c_c.T @ held.on_chaser.torque, np.zeros(3), cfg.inertia_chaser)
    out = np.empty(_STATE_SIZE)
    out[0:3] = dpos
    out[3:6] = dvel
    out[6:10] = dq1
    out[10:13] = dw1
    out[13:17] = dq2
    out[17:20] = dw2
    out[20:23] = dh
    return out


def integrate_step(state: SatelliteState, held: HeldWrenches,
                   cfg: PlantConfig, omega_o: float, dt: float) -> SatelliteState:
    """One fixed-step RK4 update with quaternion renormalization."""
    if dt <= 0.0:
        raise ValidationError("dt must be positive")
    x = state.pack()
    k1 = _state_derivative(x, held, cfg, omega_o)
    k2 = _state_derivative(x + 0.5 * dt * k1, held, cfg, omega_o)
    k3 = _state_derivative(x + 0.5 * dt * k2, held, cfg, omega_o)
    k4 = _state_derivative(x + dt * k3, held, cfg, omega_o)
    x_new = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(x_new)):
        raise NumericFault("non-finite state after integration step")
    x_new[6:10] /= np.linalg.norm(x_new[6:10])
    x_new[13:17] /= np.linalg.norm(x_new[13:17])
    return SatelliteState.unpack(x_new)


def body_momentum_in_reference(state: SatelliteState, cfg: PlantConfig):
    """Rotational momenta (target incl. wheel, chaser) in reference components."""
    c_t = frames.quat_to_dcm(state.quat_target)
    c_c = frames.quat_to_dcm(state.quat_chaser)
    h_target = c_t @ (np.asarray(cfg.inertia_target) @ state.omega_target
                      + state.h_rw)
    h_chaser = c_c @ (np.asarray(cfg.inertia_chaser) @ state.omega_chaser)
    return h_target, h_chaser


def total_angular_momentum(state: SatelliteState, cfg: PlantConfig) -> np.ndarray:
    """Total angular momentum about the (free-space) center of mass.

    Only meaningful with ``omega_o = 0`` and mutual forcing, where the center
    of mass is inertially fixed and the relative state maps to absolute states
    via the mass ratio.
    """
    m_c, m_t = cfg.mass_chaser, cfg.mass_target
    mu_red = m_c * m_t / (m_c + m_t)
    h_orbit = mu_red * np.cross(state.rel_pos, state.rel_vel)
    h_target, h_chaser = body_momentum_in_reference(state, cfg)
    return h_orbit + h_target + h_chaser
