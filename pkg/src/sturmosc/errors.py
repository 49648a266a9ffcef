"""Exception hierarchy shared by all modules."""


class SturmError(Exception):
    """Base class for errors raised by :mod:`sturmosc`."""


class ValidationError(SturmError, ValueError):
    """Input violates an operation's preconditions or a file schema."""


class PoleError(SturmError, ValueError):
    """A resolvent was requested at (or numerically at) an eigenvalue."""


class BoundaryError(SturmError, ValueError):
    """A search-window endpoint coincides with an eigenvalue."""


class ConvergenceError(SturmError, RuntimeError):
    """An iterative procedure exhausted its work budget.

    ``partial`` carries whatever result was available when it gave up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
