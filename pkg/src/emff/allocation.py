"""AC current modulation, period-averaged wrench, and the decentralized solve.

Both satellites drive their coils with shared-frequency sine/cosine current
amplitudes.  Averaging the bilinear interaction over one period leaves half
the sum of the sine-sine and cosine-cosine Kronecker terms.  The target
satellite's amplitudes are predetermined from the relative distance (two
independent triples, which keeps the allocation matrix regular); the chaser
then solves a 6x6 linear system for the amplitudes that realize a commanded
average wrench, without any communication.

Amplitude triples are body-frame per-coil currents in amperes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllocationSingularError, ConfigError, ValidationError
from .field_exact import MU0_OVER_4PI, CoilSpec, Wrench

DEFAULT_AC_FREQUENCY = 8.0 * np.pi


@dataclass(frozen=True)
class ACCommand:
    """Sine/cosine current-amplitude triples [A] plus the shared AC frequency."""

    s: np.ndarray
    c: np.ndarray
    omega_f: float = DEFAULT_AC_FREQUENCY

    def __post_init__(self):
        object.__setattr__(self, "s", np.asarray(self.s, dtype=float))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        if self.s.shape != (3,) or self.c.shape != (3,):
            raise ValidationError("amplitude triples must be 3-vectors")
        if self.omega_f <= 0.0:
            raise ValidationError("AC frequency must be positive")

    @property
    def peak(self) -> float:
        """Largest single amplitude component."""
        return float(max(np.abs(self.s).max(), np.abs(self.c).max()))

    @staticmethod
    def zero(omega_f: float = DEFAULT_AC_FREQUENCY) -> "ACCommand":
        return ACCommand(s=np.zeros(3), c=np.zeros(3), omega_f=omega_f)


@dataclass(frozen=True)
class AllocatorConfig:
    c_amp0: float = 3.0
    target_coeffs: tuple = (0.1, 0.3, 0.7)
    current_limit: float = 10.0
    condition_threshold: float = 1e8
    ac_frequency: float = DEFAULT_AC_FREQUENCY

    def __post_init__(self):
        if self.c_amp0 <= 0.0 or self.current_limit <= 0.0:
            raise ConfigError("c_amp0 and current_limit must be positive")
        if len(self.target_coeffs) != 3:
            raise ConfigError("target_coeffs must have three entries")


@dataclass(frozen=True)
class ChaserAllocation:
    """Solved chaser command plus solver diagnostics for the trajectory log."""

    command: ACCommand
    saturated: bool
    condition_number: float
    scale_applied: float = 1.0


def target_currents(r_now: np.ndarray, r_init: np.ndarray,
                    cfg: AllocatorConfig) -> ACCommand:
    """Predetermined target-satellite amplitudes from the relative distance.

    The sine triple is ``c_amp0 * scale * coeffs`` and the cosine triple is
    the complement ``c_amp0 * scale * 1 - s``, giving two linearly independent
    triples; components are clamped to the amplitude limit.
    """
    norm_init = np.linalg.norm(r_init)
    if norm_init == 0.0:
        raise ValidationError("initial relative position must be nonzero")
    scale = np.linalg.norm(r_now) / norm_init
    base = cfg.c_amp0 * scale
    s = base * np.asarray(cfg.target_coeffs, dtype=float)
    c = base * np.ones(3) - s
    lim = cfg.current_limit
    return ACCommand(s=np.clip(s, -lim, lim), c=np.clip(c, -lim, lim),
                     omega_f=cfg.ac_frequency)


def instantaneous_current(cmd: ACCommand, t: float) -> np.ndarray:
    """Coil currents at time ``t`` [A]."""
    return cmd.s * np.sin(cmd.omega_f * t) + cmd.c * np.cos(cmd.omega_f * t)


def averaged_wrench(q: np.ndarray, cmd_k: ACCommand, cmd_j: ACCommand,
                    coil: CoilSpec) -> Wrench:
    """First-order averaged wrench on satellite j for AC commands on both."""
    if cmd_k.omega_f != cmd_j.omega_f:
        raise ValidationError(
            f"AC frequencies differ: {cmd_k.omega_f} vs {cmd_j.omega_f}")
    scale = coil.turns * coil.area
    kron = (np.kron(scale * cmd_k.s, scale * cmd_j.s)
            + np.kron(scale * cmd_k.c, scale * cmd_j.c))
    w = 0.5 * MU0_OVER_4PI * np.asarray(q, dtype=float) @ kron
    return Wrench.from_vector(w)


def allocation_matrix(q: np.ndarray, cmd_target: ACCommand,
                      coil: CoilSpec) -> np.ndarray:
    """6x6 map from chaser [s; c] current amplitudes to averaged wrench."""
    scale = coil.turns * coil.area
    sc = np.column_stack([cmd_target.s, cmd_target.c])
    factor = np.kron(sc, np.eye(3))  # (9, 6)
    return 0.5 * MU0_OVER_4PI * scale * scale * (np.asarray(q, float) @ factor)


def allocate_chaser(q: np.ndarray, cmd_target: ACCommand, desired: Wrench,
                    coil: CoilSpec, cfg: AllocatorConfig) -> ChaserAllocation:
    """Solve the decentralized 6x6 system for the chaser's amplitudes.

    If any solved amplitude exceeds the limit, both triples are scaled down
    uniformly (the realized wrench stays parallel to the demand because the
    target command is fixed and the map is linear in the chaser amplitudes).
    """
    m = allocation_matrix(q, cmd_target, coil)
    condition = float(np.linalg.cond(m))
    if not np.isfinite(condition) or condition > cfg.condition_threshold:
        detail = ""
        sc = np.column_stack([cmd_target.s, cmd_target.c])
        if np.linalg.matrix_rank(sc, tol=1e-12) < 2:
            detail = " (target sine and cosine amplitude triples are parallel)"
        raise AllocationSingularError(
            f"allocation matrix condition number {condition:.3e} exceeds "
            f"{cfg.condition_threshold:.1e}{detail}")
    solution = np.linalg.solve(m, desired.as_vector())
    s, c = solution[:3], solution[3:]
    peak = max(np.abs(s).max(), np.abs(c).max())
    saturated = bool(peak > cfg.current_limit)
    scale = cfg.current_limit / peak if saturated else 1.0
    command = ACCommand(s=scale * s, c=scale * c, omega_f=cmd_target.omega_f)
    return ChaserAllocation(command=command, saturated=saturated,
                            condition_number=condition, scale_applied=scale)
