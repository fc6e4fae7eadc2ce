"""Exception hierarchy shared by every module."""


class MultlagError(Exception):
    """Base class for all library errors."""


class NonPositiveLambda(MultlagError, ValueError):
    pass


class SpeedLimitExceeded(MultlagError, ValueError):
    pass


class DomainError(MultlagError, ValueError):
    pass


class UnsupportedOperation(MultlagError, ArithmeticError):
    pass


class DegenerateHessian(MultlagError, ArithmeticError):
    """The velocity Hessian of a Lagrangian is too small to solve for the acceleration."""


class DegenerateEnergy(MultlagError, ValueError):
    """Hierarchy Hamiltonian run started at (numerically) zero standard energy."""


class GridMismatch(MultlagError, ValueError):
    pass


class HierarchyOrderOverflow(MultlagError, OverflowError):
    """Requested hierarchy order is beyond the exact-coefficient bound."""


class QuadratureError(MultlagError, RuntimeError):
    pass


class ConfigError(MultlagError, ValueError):
    pass
