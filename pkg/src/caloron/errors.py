"""Exception types shared across the toolkit."""


class CaloronError(Exception):
    pass


class SizeLimitError(CaloronError, ValueError):
    pass


class DegreeError(CaloronError, ValueError):
    pass


class ParityError(CaloronError, ValueError):
    pass


class NotAvailableError(CaloronError, KeyError):
    pass


class ShapeError(CaloronError, ValueError):
    pass


class ArityError(CaloronError, ValueError):
    pass


class ConfigError(CaloronError, ValueError):
    pass


class BranchCutError(CaloronError, ArithmeticError):
    pass


class DomainError(CaloronError, ValueError):
    pass


class SingularOperatorError(CaloronError, ArithmeticError):
    pass
