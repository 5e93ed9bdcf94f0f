"""Exception hierarchy for microkerr."""


class MicrokerrError(Exception):
    """Base class for all package errors."""


class ConfigError(MicrokerrError, ValueError):
    """Bad input values or an unparseable configuration."""


class OutOfRegime(MicrokerrError):
    """Parameters fall outside the regime the closed-form model assumes."""


class LevelOrderError(OutOfRegime):
    pass


class DegenerateCapacitance(MicrokerrError, ValueError):
    pass


class IndistinguishableHypotheses(MicrokerrError):
    pass


class UnnormalizedInput(MicrokerrError, ValueError):
    pass


class UnknownMode(MicrokerrError, KeyError):
    pass


class ZeroNormBranch(MicrokerrError):
    pass


class RegisterMismatch(MicrokerrError, ValueError):
    pass


class IncompleteDetections(MicrokerrError, ValueError):
    pass


class TranscriptMismatch(MicrokerrError):
    pass
