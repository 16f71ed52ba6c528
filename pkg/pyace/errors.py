class AceError(Exception):
    """
    Base class for every error raised by pyace.
    """


class ConfigError(AceError):
    pass


class EncodingError(AceError):
    pass


class IntegrityError(AceError):
    """
    A persisted transcript does not match its hash chain or header.
    """


class StatementError(AceError):
    """
    Raised by provers asked to prove a false statement.
    """


class TrapdoorError(AceError):
    pass


class ProtocolError(AceError):
    """
    An actor was asked to do something its state does not allow.
    """


class BoardError(AceError):
    pass


class WrongPhase(BoardError):
    pass


class BadSignature(BoardError):
    pass


class DuplicateVote(BoardError):
    pass


class DuplicateEntry(BoardError):
    pass


class NotAuthorized(BoardError):
    pass


class TickError(BoardError):
    pass


class OpenSessions(BoardError):
    pass


class UnknownReference(BoardError):
    pass
