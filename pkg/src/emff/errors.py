"""Shared exception and warning types."""


class ValidationError(ValueError):
    """An input violates a documented precondition (bad shape, non-orthonormal
    rotation, zero relative position, ...)."""


class CoilOverlapError(ValueError):
    """Coil separation is below the admissibility guard; the interaction
    integrals approach a singularity and the rigid-coil model is invalid."""


class ConfigError(ValueError):
    """A configuration object is internally inconsistent."""


class NumericFault(RuntimeError):
    """A non-finite value appeared where the math guarantees finiteness."""


class AllocationSingularError(RuntimeError):
    """The 6x6 current-allocation system is rank deficient or too badly
    conditioned to invert."""


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss."""


class ExtrapolationWarning(UserWarning):
    """A surrogate query fell outside the trained sample region."""
