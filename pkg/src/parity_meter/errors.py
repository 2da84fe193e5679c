"""Exception taxonomy shared across the package.

Every error raised by this package derives from :class:`ParityMeterError`
so callers can catch the whole family with one clause.  The concrete
subclasses additionally derive from the closest builtin (``ValueError`` or
``RuntimeError``) so they behave sensibly for callers that only know the
standard hierarchy.
"""


class ParityMeterError(Exception):
    """Base class for all errors raised by parity_meter."""


class SchemaError(ParityMeterError, ValueError):
    """Input records or columns do not have the expected structure."""


class RangeError(ParityMeterError, ValueError):
    """A value lies outside its legal domain (e.g. a prediction not in [0, 1])."""


class GroupError(ParityMeterError, ValueError):
    """Group structure is unusable: unknown id, or fewer than two groups."""


class DegenerateError(ParityMeterError, ValueError):
    """A sample cannot support the requested estimate (zero spread or too few points)."""


class ConfigError(ParityMeterError, ValueError):
    """A configuration value is out of its allowed range."""


class MissingLabelError(ParityMeterError, ValueError):
    """An accuracy metric was requested but no ground-truth labels are present."""


class MissingPositiveError(ParityMeterError, ValueError):
    """Average precision is undefined because no positive labels exist."""


class SizeError(ParityMeterError, ValueError):
    """Two samples that must match in size do not."""


class DivisionError(ParityMeterError, ValueError):
    """A relative error was requested against a ground truth of zero."""


class DivergenceError(ParityMeterError, RuntimeError):
    """Training produced a non-finite loss.

    Attributes
    ----------
    epoch : int
        Index of the epoch at which the loss became non-finite.
    """

    def __init__(self, message, epoch):
        super().__init__(message)
        self.epoch = epoch


class UnsupportedSpec(ParityMeterError, ValueError):
    """No closed form exists for the requested quantity and numeric fallback was disabled."""
