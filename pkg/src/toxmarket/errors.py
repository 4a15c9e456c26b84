"""Exception hierarchy shared by every module.

The service layer maps these onto protocol error codes, so new error
conditions should subclass the bucket they belong to rather than raising
bare ValueErrors.
"""


class ToxmarketError(Exception):
    """Base class for all domain errors."""


class NotFoundError(ToxmarketError):
    """Referenced entity (asset, market, account, ...) does not exist."""


class ArgumentError(ToxmarketError):
    """Caller supplied an invalid value (maps to 400)."""


class AuthError(ToxmarketError):
    """Missing, unknown, or expired credential (maps to 401)."""


class StateConflictError(ToxmarketError):
    """Operation is valid in general but not in the current state (maps to 409)."""


class MarketClosedError(StateConflictError):
    """Trading attempted on a halted or settled market, or past cutoff."""


class AlreadySettledError(StateConflictError):
    """Second settlement attempt on the same market."""


class InsufficientBalanceError(StateConflictError):
    """Account balance cannot cover the requested spend."""


class WagerCapExceededError(StateConflictError):
    """Per-market wager cap would be breached.

    Carries the remaining allowance so callers can report it verbatim.
    """

    def __init__(self, market_id: str, remaining_cents: int):
        self.market_id = market_id
        self.remaining_cents = remaining_cents
        super().__init__(
            f"wager cap exceeded on {market_id}: "
            f"remaining allowance {remaining_cents} cents"
        )


class IngestError(ToxmarketError):
    """The asset input stream is unreadable as a whole (not a per-record reject)."""


class JournalCorruptError(ToxmarketError):
    """Event journal failed to parse; refuse to start.

    ``offset`` is the byte offset of the first unreadable record.
    """

    def __init__(self, path: str, offset: int, reason: str):
        self.path = path
        self.offset = offset
        self.reason = reason
        super().__init__(f"corrupt journal {path} at byte offset {offset}: {reason}")
