"""HTTP/JSON surface of the bridge server (FastAPI).

All bodies are UTF-8 JSON with the package's hex conventions. Sessions
ride in an HttpOnly cookie. Errors come back as
``{"error": <code>, "detail": <message>}`` with the class's HTTP status.
"""
from __future__ import annotations

import os
from typing import Any, Mapping, Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from ..claims import BridgeSubmission
from ..crypto.signing import RecoverableSignature
from ..errors import MalformedSubmission, ProtocolError
from ..ledger import FileLedger, InMemoryLedger
from ..model import DisclosureRequest, DisclosureSet
from .service import BridgeService, ManualClock, ServerIdentity

SESSION_COOKIE = "session"


async def _json_body(request: Request) -> Mapping[str, Any]:
    try:
        body = await request.json()
    except Exception as exc:
        raise MalformedSubmission(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, Mapping):
        raise MalformedSubmission("request body must be a JSON object")
    return body


def _field(body: Mapping[str, Any], key: str) -> Any:
    if key not in body:
        raise MalformedSubmission(f"missing field: {key}")
    return body[key]


def create_app(service: BridgeService, *, enable_test_clock: bool = False) -> FastAPI:
    app = FastAPI(title="idbridge", docs_url=None, redoc_url=None)
    app.state.service = service

    @app.exception_handler(ProtocolError)
    async def protocol_error_handler(_request: Request, exc: ProtocolError):
        return JSONResponse(
            status_code=exc.http_status, content={"error": exc.code, "detail": str(exc)}
        )

    def _session(request: Request):
        return service.session_for(request.cookies.get(SESSION_COOKIE))

    # -- authentication ----------------------------------------------------

    @app.post("/auth/challenge")
    async def auth_challenge(request: Request):
        body = await _json_body(request)
        nonce, message = service.create_challenge(_field(body, "wallet"))
        return {"nonce": nonce, "message": message}

    @app.post("/auth/verify")
    async def auth_verify(request: Request, response: Response):
        body = await _json_body(request)
        try:
            encryption_public = bytes.fromhex(_field(body, "encryption_public"))
            signature = RecoverableSignature.from_hex(_field(body, "signature"))
        except (ValueError, TypeError) as exc:
            raise MalformedSubmission(str(exc)) from exc
        session = service.verify_auth(_field(body, "wallet"), encryption_public, signature)
        response.set_cookie(
            SESSION_COOKIE, session.token, httponly=True, samesite="strict", path="/"
        )
        return {"wallet": session.wallet, "expires_at": session.expires_at}

    # -- claims ------------------------------------------------------------

    @app.post("/claims")
    async def store_claims(request: Request):
        session = _session(request)
        body = await _json_body(request)
        try:
            submission = BridgeSubmission.from_wire(body)
        except ValueError as exc:
            raise MalformedSubmission(str(exc)) from exc
        record = service.store_claims(session, submission)
        return record.to_wire()

    @app.get("/claims")
    async def list_claims(request: Request):
        session = _session(request)
        return {"claims": service.list_claims(session)}

    @app.get("/claims/{issuer:path}")
    async def fetch_claims(issuer: str, request: Request, indices: Optional[str] = None):
        session = _session(request)
        index_filter = None
        if indices is not None:
            try:
                index_filter = [int(part) for part in indices.split(",") if part]
            except ValueError as exc:
                raise MalformedSubmission("indices must be a comma-separated list of integers") from exc
        result = service.fetch_claims(session, issuer, index_filter)
        from ..model import ciphertext_to_wire

        return {
            "issuer": result.issuer,
            "h1": result.h1.hex(),
            "ciphertexts": [ciphertext_to_wire(ct) for ct in result.ciphertexts],
            "descriptors": [d.to_wire() for d in result.descriptors],
            "bridge_record": result.bridge_record.to_wire(),
        }

    @app.delete("/claims/{issuer:path}")
    async def delete_claims(issuer: str, request: Request):
        session = _session(request)
        service.delete_claims(session, issuer)
        return {"deleted": True}

    # -- presentations -------------------------------------------------------

    @app.post("/presentations/configs")
    async def register_config(request: Request):
        body = await _json_body(request)
        requests_wire = _field(body, "requests")
        if not isinstance(requests_wire, list):
            raise MalformedSubmission("requests must be a list")
        try:
            requests = [DisclosureRequest.from_wire(r) for r in requests_wire]
        except (ValueError, ProtocolError) as exc:
            raise MalformedSubmission(str(exc)) from exc
        config = service.register_config(
            _field(body, "verifier_id"), _field(body, "callback_url"), requests
        )
        return {"config_id": config.config_id}

    @app.get("/presentations/configs/{config_id}")
    async def get_config(config_id: str):
        return service.get_config(config_id).to_wire()

    @app.post("/presentations/{config_id}")
    async def submit_presentation(config_id: str, request: Request):
        session = _session(request)
        body = await _json_body(request)
        try:
            disclosure = DisclosureSet.from_wire(body)
        except ValueError as exc:
            raise MalformedSubmission(str(exc)) from exc
        token, redirect_url, _payload = service.submit_presentation(session, config_id, disclosure)
        return {"token": token, "redirect_url": redirect_url}

    # -- server key -----------------------------------------------------------

    @app.get("/server/key")
    async def server_key():
        return {"verification_key": service.verification_key()}

    # -- deterministic clock for tests ----------------------------------------

    if enable_test_clock and isinstance(service._clock, ManualClock):

        @app.post("/test/clock/advance")
        async def advance_clock(request: Request):
            body = await _json_body(request)
            seconds = _field(body, "seconds")
            if isinstance(seconds, bool) or not isinstance(seconds, (int, float)):
                raise MalformedSubmission("seconds must be a number")
            service._clock.advance(float(seconds))
            return {"now": service.now()}

    return app


def app_from_env() -> FastAPI:
    """Build the server from environment configuration.

    IDBRIDGE_STORE_PATH       claims/config persistence file (default ./idbridge-store.json)
    IDBRIDGE_LEDGER_PATH      ledger file; ":memory:" for the in-memory backend
    IDBRIDGE_SERVER_KEY_PATH  signing key file, created on first run
    IDBRIDGE_ORIGIN           origin string embedded in sign-in challenges
    IDBRIDGE_TEST_CLOCK       if set: epoch start for a manual clock +
                              /test/clock/advance endpoint (tests only)
    """
    store_path = os.environ.get("IDBRIDGE_STORE_PATH", "idbridge-store.json")
    ledger_path = os.environ.get("IDBRIDGE_LEDGER_PATH", "idbridge-ledger.log")
    key_path = os.environ.get("IDBRIDGE_SERVER_KEY_PATH", "idbridge-server.key")
    origin = os.environ.get("IDBRIDGE_ORIGIN", "https://bridge.local")
    test_clock_start = os.environ.get("IDBRIDGE_TEST_CLOCK")

    if os.path.exists(key_path):
        identity = ServerIdentity.load(key_path)
    else:
        identity = ServerIdentity.generate()
        identity.save(key_path)

    ledger = InMemoryLedger() if ledger_path == ":memory:" else FileLedger(ledger_path)
    clock = ManualClock(float(test_clock_start)) if test_clock_start else __import__("time").time
    service = BridgeService(
        identity,
        ledger,
        origin=origin,
        clock=clock,
        store_path=None if store_path == ":memory:" else store_path,
    )
    return create_app(service, enable_test_clock=bool(test_clock_start))
