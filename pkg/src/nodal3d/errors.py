"""Exception hierarchy for nodal3d."""


class Nodal3DError(Exception):
    """Base class for all package errors."""


class ParameterOutOfRange(Nodal3DError, ValueError):
    def __init__(self, name, value, valid):
        self.name = name
        self.value = value
        self.valid = valid
        super().__init__(f"parameter {name}={value!r} outside valid range {valid}")


class QuadratureFailure(Nodal3DError, ArithmeticError):
    pass


class DivergentMoment(Nodal3DError, ArithmeticError):
    pass


class DivergentIntegral(Nodal3DError, ArithmeticError):
    pass


class GridTooLarge(Nodal3DError, MemoryError):
    pass


class NotPositiveDefinite(Nodal3DError, ArithmeticError):
    pass


class IndexTooLarge(Nodal3DError, ValueError):
    pass


class ConfigError(Nodal3DError, ValueError):
    pass
