"""Error taxonomy shared by the protocol, the HTTP layer, and the CLI.

Every error carries a stable machine-parsable ``code`` (used verbatim in
HTTP error bodies and mapped to CLI exit codes) and the HTTP status the
server responds with when the error crosses the wire.
"""
from __future__ import annotations


class ProtocolError(Exception):
    """Base class for every protocol-level failure."""

    code = "protocol_error"
    http_status = 400


class CredentialImportError(ProtocolError):
    """Credential bytes do not parse as the declared format, lack an
    issuer, or contain no usable claims."""

    code = "import_error"


class MalformedSubmission(ProtocolError):
    """Wire payload violates the submission schema (cardinality,
    encodings, indices)."""

    code = "malformed_submission"


class AuthFailed(ProtocolError):
    """Signature does not recover to the acting wallet, or the session is
    missing/invalid."""

    code = "auth_failed"
    http_status = 401


class ReplayDetected(AuthFailed):
    """A challenge nonce was presented a second time."""

    code = "replay_detected"
    http_status = 409


class SessionExpired(AuthFailed):
    """Session lifetime elapsed; re-authentication required."""

    code = "session_expired"
    http_status = 401


class NotFound(ProtocolError):
    code = "not_found"
    http_status = 404


class MissingAttribute(ProtocolError):
    """A requested (issuer, claim, attribute) is absent from the holder's
    decrypted data. ``path`` names the offender."""

    code = "missing_attribute"

    def __init__(self, path: str):
        super().__init__(f"requested attribute not present: {path}")
        self.path = path


class ModeViolation(ProtocolError):
    """Holder attempted to downgrade a blinded/predicate request to plain."""

    code = "mode_violation"


class ConsentInvalid(ProtocolError):
    code = "consent_invalid"
    http_status = 403


class IncompleteDisclosure(ProtocolError):
    """Disclosure does not cover every request of the presentation
    configuration. ``path`` names the first uncovered request."""

    code = "incomplete_disclosure"

    def __init__(self, path: str):
        super().__init__(f"disclosure does not cover requested attribute: {path}")
        self.path = path


class DeliveryFailed(ProtocolError):
    code = "delivery_failed"
    http_status = 502


class PredicateTypeError(ProtocolError):
    """Predicate operator applied to an incompatible operand/value type.
    Never silently false."""

    code = "predicate_type_error"


class DecryptionError(ProtocolError):
    """Authenticated decryption failed; ciphertext or keys are wrong or
    tampered."""

    code = "decryption_error"


class LedgerError(ProtocolError):
    code = "ledger_error"


class LedgerAuditError(LedgerError):
    """Content-hash audit failed. ``seq`` names the first bad entry."""

    code = "ledger_audit_error"

    def __init__(self, seq: int, detail: str):
        super().__init__(f"ledger audit failed at seq {seq}: {detail}")
        self.seq = seq


class TokenMismatch(ProtocolError):
    """Callback token does not match one the verifier expects."""

    code = "token_mismatch"


class MalformedPayload(ProtocolError):
    """Verifier-side: delivered payload violates the callback schema."""

    code = "malformed_payload"


def _register_codes() -> dict[str, type[ProtocolError]]:
    registry: dict[str, type[ProtocolError]] = {}
    stack = [ProtocolError]
    while stack:
        klass = stack.pop()
        registry[klass.code] = klass
        stack.extend(klass.__subclasses__())
    return registry


ERRORS_BY_CODE = _register_codes()


def error_from_code(code: str, detail: str) -> ProtocolError:
    """Rehydrate a typed error from a wire ``{"error": code}`` body."""
    klass = ERRORS_BY_CODE.get(code, ProtocolError)
    if klass in (MissingAttribute, IncompleteDisclosure, LedgerAuditError):
        # These carry structured args; fall back to the plain message form.
        error = klass.__new__(klass)
        Exception.__init__(error, detail)
        return error
    return klass(detail)
