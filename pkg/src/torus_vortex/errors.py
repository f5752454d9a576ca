"""Exception hierarchy shared by all modules.

Every error carries a stable ``code`` used by the CLI as the process exit
status, so scripted callers can tell failure kinds apart.
"""


class TorusVortexError(Exception):
    code = 1


class ParameterError(TorusVortexError, ValueError):
    code = 10


class SingularPoint(TorusVortexError, ValueError):
    code = 11


class OutOfRange(TorusVortexError, ValueError):
    code = 12


class DegenerateConfig(TorusVortexError, ValueError):
    code = 13


class InvalidConfig(TorusVortexError, ValueError):
    """Vortex configuration violates degree or distinctness invariants."""

    code = 14


class InvalidInitialData(TorusVortexError, ValueError):
    code = 15


class LatticeViolation(TorusVortexError, RuntimeError):
    code = 16


class NonConvergence(TorusVortexError, RuntimeError):
    code = 17


class CollisionImminent(TorusVortexError, RuntimeError):
    code = 18


class StepFailure(TorusVortexError, RuntimeError):
    code = 19


class GridTooCoarse(TorusVortexError, ValueError):
    code = 20


class EtaSpecInvalid(TorusVortexError, ValueError):
    code = 21


class CoreUnresolved(TorusVortexError, ValueError):
    code = 22


class UnstableStep(TorusVortexError, RuntimeError):
    code = 23


class ConfigError(TorusVortexError, ValueError):
    code = 2
