"""Exception hierarchy.

Two families matter to callers: :class:`InvalidInputError` (the input
violates a constraint or nondegeneracy condition) and
:class:`SingularityError` (a valid input hit a pole, a vanishing
denominator or an ambiguous numerical decision during evaluation).
The CLI maps them to exit codes 2 and 3.
"""


class QMiddleError(Exception):
    """Base class for all package errors."""


class InvalidInputError(QMiddleError, ValueError):
    pass


class ConstraintError(InvalidInputError):
    """A parameter tuple violates its multiplicative constraint."""

    def __init__(self, name, residual):
        self.name = name
        self.residual = residual
        super().__init__(f"constraint {name} violated (relative residual {residual:.3e})")


class DegenerateParameterError(InvalidInputError):
    pass


class CoincidentPoleError(InvalidInputError):
    pass


class SingularityError(QMiddleError, ArithmeticError):
    pass


class DivergenceError(SingularityError):
    pass


class ZeroDivisionThresholdError(SingularityError):
    pass


class KernelPoleError(SingularityError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"kernel denominator vanishes at factor i={index}")


class LatticePoleError(SingularityError):
    def __init__(self, index, message=None):
        self.index = index
        text = f"singular system matrix at lattice index n={index}"
        super().__init__(f"{message} (lattice index n={index})" if message else text)


class ProbeCollisionError(SingularityError):
    def __init__(self, index, message=None):
        self.index = index
        text = f"probe point collides with lattice index n={index}"
        super().__init__(f"{message} (lattice index n={index})" if message else text)


class RankError(SingularityError):
    pass


class RankAmbiguityError(RankError):
    def __init__(self, gap, message=None):
        self.gap = gap
        super().__init__(message or f"ambiguous numerical rank (singular value gap {gap:.3e})")


class MapSingularityError(SingularityError):
    pass


class IndeterminatePointError(SingularityError):
    pass


class ReducibleSystemError(SingularityError):
    pass


class SpecializationError(SingularityError):
    pass
