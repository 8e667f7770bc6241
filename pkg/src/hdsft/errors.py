class InvalidArgument(ValueError):
    """Input violates a precondition (shape, range, type)."""


class InfeasibleParameters(ValueError):
    """Derived or overridden discretization parameters are inconsistent."""


class InfeasibleInstance(RuntimeError):
    """A random signal instance with the requested separation could not be packed."""


class GridTooLarge(ValueError):
    """A dense oracle was asked for a grid beyond the desk-scale guard."""
