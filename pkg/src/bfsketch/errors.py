"""Exception hierarchy shared by every filter."""


class BloomError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(BloomError, ValueError):
    """A constructor or operation parameter is out of its admissible range."""


class InputError(BloomError, ValueError):
    """An item cannot be processed by the filter (wrong shape, outside the universe, ...)."""


class CapabilityError(BloomError):
    """The operation is not supported by this variant (e.g. deleting from a standard BF)."""

    def __init__(self, variant, operation):
        self.variant = variant
        self.operation = operation
        super().__init__(f"{variant} does not support {operation}")


class FilterFullError(BloomError):
    """An insertion could not find room (cuckoo relocation budget, d-left buckets)."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = dict(stats or {})


class FormatError(BloomError):
    """A serialized filter is malformed; ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset
