"""Exception hierarchy.

Every validation failure derives from :class:`AutocorrError`, itself a
``ValueError``, so the command line can map them all to exit status 2.
"""


class AutocorrError(ValueError):
    """Base class for input/validation errors raised by this package."""


class InvalidFunctionError(AutocorrError):
    pass


class ZeroFunctionError(AutocorrError):
    pass


class NonpositiveHeightError(AutocorrError):
    pass


class InsufficientMassError(AutocorrError):
    pass


class SameCellError(AutocorrError):
    pass


class DimensionMismatchError(AutocorrError):
    pass


class ZeroColumnError(AutocorrError):
    pass


class DegenerateDError(AutocorrError):
    pass


class ShapeMismatchError(AutocorrError):
    pass


class NotGuaranteedFiniteError(AutocorrError):
    pass


class TooLargeError(AutocorrError):
    pass
