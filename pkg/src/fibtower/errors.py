from __future__ import annotations


class FibtowerError(Exception):
    pass


class DomainError(FibtowerError, ValueError):
    """Argument outside the range where an operation is defined."""


class PrecisionExhausted(FibtowerError):
    """An enclosure became too wide to decide a sign or an ordering."""


class BracketFailure(FibtowerError):
    pass


class MonotonicityFault(FibtowerError):
    pass


class DepthInsufficient(FibtowerError):
    pass
