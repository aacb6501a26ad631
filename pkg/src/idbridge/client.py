"""Holder-side HTTP client for the bridge server.

Used by the CLI and tests; supports a record mode that captures every
wire request (method, path, body) for golden-transcript comparison
against other front ends.
"""
from __future__ import annotations

import json
from typing import Any, Optional, Sequence
from urllib.parse import quote

import httpx

from .claims import BridgeSubmission
from .crypto.signing import sign
from .errors import ProtocolError, error_from_code
from .model import (
    BridgeRecord,
    DisclosureRequest,
    DisclosureSet,
    PresentationConfig,
    WalletIdentity,
    bind_encryption_key,
)


class BridgeClient:
    def __init__(
        self,
        base_url: str,
        *,
        record_path: Optional[str] = None,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self._http = httpx.Client(base_url=base_url, transport=transport, timeout=10.0)
        self._record_path = record_path

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "BridgeClient":
        return self

    def __exit__(self, *_exc) -> None:
        self.close()

    # -- plumbing -----------------------------------------------------------

    def _record(self, method: str, path: str, body: Any) -> None:
        if not self._record_path:
            return
        with open(self._record_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps({"method": method, "path": path, "body": body}) + "\n")

    def _raise_for_error(self, response: httpx.Response) -> None:
        if response.is_success:
            return
        try:
            body = response.json()
            raise error_from_code(body["error"], body.get("detail", ""))
        except (ValueError, KeyError):
            raise ProtocolError(f"HTTP {response.status_code}: {response.text}") from None

    def _post(self, path: str, body: dict) -> dict:
        self._record("POST", path, body)
        response = self._http.post(path, json=body)
        self._raise_for_error(response)
        return response.json()

    def _get(self, path: str, params: Optional[dict] = None) -> dict:
        self._record("GET", path, params or {})
        response = self._http.get(path, params=params)
        self._raise_for_error(response)
        return response.json()

    def _delete(self, path: str) -> dict:
        self._record("DELETE", path, {})
        response = self._http.delete(path)
        self._raise_for_error(response)
        return response.json()

    # -- protocol operations ---------------------------------------------------

    def server_key(self) -> bytes:
        return bytes.fromhex(self._get("/server/key")["verification_key"])

    def authenticate(self, identity: WalletIdentity) -> dict:
        """Challenge -> sign (with the encryption key bound in) -> session
        cookie. Returns the verify response."""
        challenge = self._post("/auth/challenge", {"wallet": identity.address})
        message = bind_encryption_key(challenge["message"], identity.encryption_public)
        signature = sign(identity.signing_secret, message)
        return self._post(
            "/auth/verify",
            {
                "wallet": identity.address,
                "encryption_public": identity.encryption_public.hex(),
                "signature": signature.to_hex(),
            },
        )

    def store_claims(self, submission: BridgeSubmission) -> BridgeRecord:
        return BridgeRecord.from_wire(self._post("/claims", submission.to_wire()))

    def list_claims(self) -> list[dict]:
        return self._get("/claims")["claims"]

    def fetch_claims(self, issuer: str, indices: Optional[Sequence[int]] = None) -> dict:
        params = {"indices": ",".join(str(i) for i in indices)} if indices else None
        return self._get(f"/claims/{quote(issuer, safe='')}", params)

    def delete_claims(self, issuer: str) -> dict:
        return self._delete(f"/claims/{quote(issuer, safe='')}")

    def register_config(
        self, verifier_id: str, callback_url: str, requests: Sequence[DisclosureRequest]
    ) -> str:
        body = {
            "verifier_id": verifier_id,
            "callback_url": callback_url,
            "requests": [r.to_wire() for r in requests],
        }
        return self._post("/presentations/configs", body)["config_id"]

    def get_config(self, config_id: str) -> PresentationConfig:
        return PresentationConfig.from_wire(self._get(f"/presentations/configs/{config_id}"))

    def submit_presentation(self, config_id: str, disclosure: DisclosureSet) -> dict:
        return self._post(f"/presentations/{config_id}", disclosure.to_wire())
