"""Common exception base for the engine.

Every domain-specific error raised by this package derives from
:class:`AviatorError`, so callers (CLI, HTTP service) can catch one type
and map it to an exit code or status code.
"""


class AviatorError(Exception):
    """Base class for all errors raised by this package."""
