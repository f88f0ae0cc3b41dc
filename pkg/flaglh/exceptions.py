"""Error hierarchy shared by every flaglh module."""


class FlagLHError(RuntimeError):
    """Base class for failures raised by the library."""


class UnsupportedRootSystemError(FlagLHError):
    """Family/rank outside the supported Cartan types."""


class FormalGroupLawError(FlagLHError):
    """Malformed formal group law or series argument."""


class NotInSError(FlagLHError):
    """An element of Q (or a quotient) does not lie in S."""

    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = indices


class NotInvertibleError(FlagLHError):
    """Element is not a unit in the truncated model."""


class PrecisionExhaustedError(FlagLHError):
    """A result fell below the configured precision floor."""


class NotInDualError(FlagLHError):
    """A function on W failed the D* membership certificate."""


class VerificationError(FlagLHError):
    """Two independent computations of the same quantity disagree."""


class ConfigError(FlagLHError):
    """Invalid run configuration or unresolvable name."""
