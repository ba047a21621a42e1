"""Exception and warning types shared across the package."""


class TimelabError(Exception):
    """Base class for all errors raised by timelab."""


class ConfigurationError(TimelabError, ValueError):
    """Invalid parameter value or inconsistent configuration.

    ``field`` names the offending parameter when one can be identified.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ShapeError(TimelabError, ValueError):
    """Operands live on incompatible grids."""


class GeneralizedStateError(TimelabError, ValueError):
    """A non-normalizable state was passed where a normalized one is needed."""


class UndefinedMomentsError(TimelabError, ValueError):
    pass


class UnsupportedObservableError(TimelabError, ValueError):
    pass


class StepSizeError(TimelabError, ValueError):
    """Time step too large for the split-operator phase bound."""


class MethodError(TimelabError, ValueError):
    """Integration method incompatible with the model."""


class NoArrivalError(TimelabError, RuntimeError):
    pass


class TurningPointError(TimelabError, ValueError):
    """A square-root radicand becomes nonpositive on the requested range."""


class MonotonicityError(TimelabError, ValueError):
    """Reduction coordinate is not strictly monotone on the segment."""


class UndefinedMarginError(TimelabError, ValueError):
    pass


class TruncationWarning(UserWarning):
    """A state does not fit on its grid (position or momentum extent)."""


class CoverageWarning(UserWarning):
    """An arrival-time window captures noticeably less than unit probability."""
