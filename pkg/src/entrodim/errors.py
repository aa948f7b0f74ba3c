"""Exception types shared across the toolkit."""


class EntrodimError(Exception):
    """Base class for all toolkit errors."""


class InputError(EntrodimError):
    """Malformed or out-of-range input (maps to CLI exit code 2)."""


class InfeasibleError(EntrodimError):
    """A requested construction is infeasible at the given finite depth.

    Carries the achievable bound when one is known.
    """

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class CertificationError(EntrodimError):
    """Numerical certification failed (maps to CLI exit code 3).

    `detail` carries the ambiguous quantity, e.g. an interval that the
    certification step could not resolve.
    """

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class WindowResolutionError(CertificationError):
    """A finite window was too short to determine a metric value exactly.

    `detail` is the certified bounding interval (lo, hi).
    """
