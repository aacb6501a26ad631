"""Bridge server: core service plus the HTTP/JSON adapter."""

from .http import app_from_env, create_app
from .service import BridgeService, FetchResult, ManualClock, ServerIdentity, Session, StoredClaims

__all__ = [
    "BridgeService",
    "FetchResult",
    "ManualClock",
    "ServerIdentity",
    "Session",
    "StoredClaims",
    "app_from_env",
    "create_app",
]
