"""Exception hierarchy shared by all entmap modules."""


class EntmapError(Exception):
    """Base class for every error raised by entmap."""


class NonSquareError(EntmapError, ValueError):
    pass


class NotHermitianError(EntmapError, ValueError):
    pass


class DimensionMismatchError(EntmapError, ValueError):
    pass


class OutOfRangeError(EntmapError, ValueError):
    pass


class WrongDimensionsError(EntmapError, ValueError):
    """A measure was asked to handle a state outside its closed-form domain."""


class NotApplicableError(EntmapError, ValueError):
    pass


class NotUnitaryError(EntmapError, ValueError):
    pass


class IncompletePOVMError(EntmapError, ValueError):
    pass


class ParseError(EntmapError, ValueError):
    pass


class ValidationError(EntmapError, ValueError):
    """Raised when a state fails validation; ``report`` holds the defects."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
