"""Exception and warning types shared across the simulator."""

__all__ = [
    "VxsimError",
    "GridSizeError",
    "ConfigError",
    "FieldFormatError",
    "DivergenceError",
    "MaskError",
    "PhaseUndefinedError",
    "CoreSingularityError",
    "TrapSolveError",
    "QuadratureError",
    "AdiabaticityWarning",
    "WeakProbeWarning",
]


class VxsimError(Exception):
    """Base class for all simulator errors."""


class GridSizeError(VxsimError):
    """Grid sizing violates the power-of-two / minimum-size contract."""


class ConfigError(VxsimError):
    """Config file cannot be parsed or validated.

    Carries the offending line number when one is known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FieldFormatError(VxsimError):
    """Binary field dump is malformed or inconsistent with its header."""


class DivergenceError(VxsimError):
    """Non-finite field values appeared during time stepping."""

    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)


class MaskError(VxsimError):
    """A quantity was requested at points excluded by the validity mask."""


class PhaseUndefinedError(VxsimError):
    """Loop phase sampling hit amplitudes below the floor; phase is undefined."""


class CoreSingularityError(VxsimError):
    """Gauge field exceeds the magnitude cap where the state is not vanishing."""


class TrapSolveError(VxsimError):
    """Pointwise trap solve is degenerate or non-finite inside the mask."""


class QuadratureError(VxsimError):
    """Adaptive quadrature failed to converge."""


class AdiabaticityWarning(UserWarning):
    """Loading ramp left the dark-state manifold beyond the reporting floor."""


class WeakProbeWarning(UserWarning):
    """Probe/control ratio exceeds the recommended weak-probe bound."""
