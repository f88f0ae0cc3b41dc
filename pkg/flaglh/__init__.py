"""
Equivariant oriented cohomology of flag varieties: formal group algebras,
the formal affine Demazure algebra, dual bases and Leray-Hirsch matrices.
"""

from flaglh.config import RunConfig, build_context, resolve_config
from flaglh.exceptions import (
    ConfigError,
    FlagLHError,
    FormalGroupLawError,
    NotInDualError,
    NotInSError,
    NotInvertibleError,
    PrecisionExhaustedError,
    UnsupportedRootSystemError,
    VerificationError,
)

__version__ = "1.0.0"

__all__ = [
    "RunConfig",
    "build_context",
    "resolve_config",
    "ConfigError",
    "FlagLHError",
    "FormalGroupLawError",
    "NotInDualError",
    "NotInSError",
    "NotInvertibleError",
    "PrecisionExhaustedError",
    "UnsupportedRootSystemError",
    "VerificationError",
]
