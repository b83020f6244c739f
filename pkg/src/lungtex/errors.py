"""Exception hierarchy shared by every stage."""


class LungtexError(Exception):
    """Base class for all errors raised by this package."""


class DataError(LungtexError, ValueError):
    """Input data is missing, malformed or violates a precondition."""


class SegmentationError(DataError):
    pass


class ModelError(LungtexError):
    """A persisted model cannot be parsed or does not match the config."""
