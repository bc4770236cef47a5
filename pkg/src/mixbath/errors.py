"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line interface:
1 for configuration problems, 2 for numerical failures, 3 for failed
verification.
"""


class MixbathError(Exception):
    exit_code = 2


class ConfigError(MixbathError, ValueError):
    exit_code = 1

    def __init__(self, message, line=None, column=None, section=None):
        self.line = line
        self.column = column
        self.section = section
        self.detail = message
        where = []
        if section is not None:
            where.append(f"section [{section}]")
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class UnitsError(ConfigError):
    """Renormalized frequency is not positive."""


class PreconditionError(MixbathError, ValueError):
    exit_code = 1


class DomainError(MixbathError, ValueError):
    pass


class NumericalError(MixbathError, ArithmeticError):
    pass


class DegenerateRoots(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class NodeCollision(NumericalError):
    pass


class UnstableRoots(NumericalError):
    pass


class QuadratureNonConvergence(NumericalError):
    pass


class DenominatorFloor(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass


class ResourceLimit(NumericalError):
    pass


class VerificationFailure(MixbathError):
    exit_code = 3


class WindowTooShort(UserWarning):
    """Fewer than three oscillation periods fit inside the analysis window."""
