"""OpenFlow time extension: wire codec and switch-side bundle semantics."""

from .codec import *  # noqa: F401,F403
from .codec import WIRE_TYPES, decode, encode, explain  # noqa: F401
from .session import (  # noqa: F401
    Bundle, BundleRejected, BundleSession, ExecuteAt, ExecuteNow, Execution, SwitchTimeCaps,
    ToleranceConfig, apply_features_request, check_tolerance,
)
