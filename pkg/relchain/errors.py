"""
Exception hierarchy shared by every relchain component.
"""


class RelchainError(Exception):
    """Base class for all relchain errors."""


class DecodeError(RelchainError):
    """Bytes are not a canonical encoding of the expected type."""


class ChainMismatch(RelchainError):
    """A block does not extend the current ledger tip."""


class NotFound(RelchainError):
    pass


class ConfigError(RelchainError):
    pass


class ContractViolation(RelchainError):
    """ABCI lifecycle call arrived out of order."""


class BackendUnavailable(RelchainError):
    """The backend could not be reached (socket closed, refused, timed out)."""


class ParseError(RelchainError):
    def __init__(self, offset, expected, text=None):
        self.offset = offset
        self.expected = expected
        message = f"parse error at offset {offset}: expected {expected}"
        if text is not None:
            message += f" near {text!r}"
        super().__init__(message)


class NotReadOnly(RelchainError):
    """A mutating statement was sent through the read-only query path."""


class DuplicateProcedure(RelchainError):
    pass


class ExecutionError(RelchainError):
    """Statement level failure. Turned into a failed ExecStatus by the executor."""


class DeadlineExceeded(RelchainError):
    pass


class Rejected(RelchainError):
    def __init__(self, reason, tx_hash=None):
        self.reason = reason
        self.tx_hash = tx_hash
        super().__init__(f"transaction rejected: {reason}")


class BroadcastTimeout(RelchainError):
    pass


class VerificationFailure(RelchainError):
    def __init__(self, report):
        self.report = report
        failed = ", ".join(str(f) for f in report.failures[:5])
        super().__init__(f"{len(report.failures)} failed statement(s): {failed}")


class Stall(RelchainError):
    pass


class FatalNodeError(RelchainError):
    pass


class SubscriptionOverflow(RelchainError):
    """The subscriber fell a full buffer behind and its stream was cancelled."""


# error kinds as they travel over the ABCI and RPC sockets
ERROR_KINDS = {cls.__name__: cls for cls in (
    RelchainError, DecodeError, ChainMismatch, NotFound, ConfigError, ContractViolation,
    BackendUnavailable, NotReadOnly, DuplicateProcedure, ExecutionError, DeadlineExceeded,
    BroadcastTimeout, Stall, FatalNodeError, SubscriptionOverflow)}


def error_to_kind(exc):
    """Flatten an exception into the (kind, message) pair sent over a socket."""
    if isinstance(exc, ParseError):
        return "ParseError", f"{exc.offset}\x00{exc.expected}"
    if isinstance(exc, Rejected):
        return "Rejected", str(exc.reason)
    kind = type(exc).__name__ if type(exc).__name__ in ERROR_KINDS else "RelchainError"
    return kind, str(exc)


def error_from_kind(kind, message):
    """Rebuild an exception received from a remote peer."""
    if kind == "ParseError":
        offset, _, expected = message.partition("\x00")
        return ParseError(int(offset), expected)
    if kind == "Rejected":
        return Rejected(message)
    return ERROR_KINDS.get(kind, RelchainError)(message)
