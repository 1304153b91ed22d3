"""Exception types raised by the package."""


class CavityTeleportError(Exception):
    """Base class for all package errors."""


class NotHermitianError(CavityTeleportError, ValueError):
    pass


class NoConvergenceError(CavityTeleportError, ArithmeticError):
    pass


class BadLayoutError(CavityTeleportError, ValueError):
    pass


class DimMismatchError(CavityTeleportError, ValueError):
    pass


class InvalidStateError(CavityTeleportError, ValueError):
    """A matrix failed the density-matrix invariants."""


class NegativeTimeError(CavityTeleportError, ValueError):
    pass


class StepTooLargeError(CavityTeleportError, ArithmeticError):
    """Integrator drifted out of the physical state space."""


class TruncationLeakError(CavityTeleportError, ArithmeticError):
    """Too much population reached the highest retained Fock state."""


class ConfigError(CavityTeleportError, ValueError):
    pass
