"""Exception hierarchy shared by every nlmsr module."""


class NlmsrError(Exception):
    """Base class for all errors raised by nlmsr."""


class ParameterError(NlmsrError, ValueError):
    """An argument is outside its documented domain (even patch size, p < 1, ...)."""


class ContractError(NlmsrError, ValueError):
    """A precondition on the inputs was violated (coordinates out of bounds, asymmetric matrix, ...)."""


class DegenerateSystemError(NlmsrError, ArithmeticError):
    """A weighted least-squares system carries no information (all weights zero)."""


class PgmFormatError(NlmsrError, ValueError):
    """Malformed or truncated PGM data.

    ``offset`` is the byte offset at which parsing failed, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(PgmFormatError):
    """Well-formed Netpbm data that this reader does not handle (maxval > 255, color, ...)."""
