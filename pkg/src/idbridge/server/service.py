"""Bridge server core: wallet authentication, encrypted-claims custody,
attestation signing, presentation orchestration, and ledger logging.

The server holds its own signing key and the holders' ciphertexts; it
never holds plaintext claims. All logic here is transport-free — the HTTP
layer in ``http.py`` is a thin adapter.
"""
from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Sequence

import httpx

from ..claims import BridgeSubmission, PayloadDescriptor
from ..crypto.rng import Randomness, SYSTEM_RANDOMNESS, new_challenge_nonce, new_redirect_token
from ..crypto.sealedbox import Ciphertext
from ..crypto.hashing import sha512
from ..crypto.signing import (
    RecoverableSignature,
    derive_address,
    generate_signing_secret,
    public_from_secret,
    recover,
    sign,
)
from ..errors import (
    AuthFailed,
    ConsentInvalid,
    DeliveryFailed,
    IncompleteDisclosure,
    MalformedSubmission,
    NotFound,
    ReplayDetected,
    SessionExpired,
)
from ..ledger import Ledger
from ..model import (
    BridgeRecord,
    DisclosureRequest,
    DisclosureSet,
    LEDGER_KIND_BRIDGE,
    LEDGER_KIND_PRESENTATION,
    LedgerEntry,
    PAYLOAD_KIND_ATTRIBUTE,
    PAYLOAD_KIND_PROVENANCE,
    PresentationConfig,
    bind_encryption_key,
    ciphertext_bytes,
    ciphertext_from_wire,
    ciphertext_to_wire,
    normalize_address,
    wallet_ref_for,
)

CHALLENGE_LIFETIME = 300  # seconds a sign-in nonce stays valid
SESSION_LIFETIME = 900  # seconds an authenticated session stays valid


class ManualClock:
    """Injectable clock for deterministic expiry/sybil tests."""

    def __init__(self, start: float = 1_700_000_000.0):
        self._now = float(start)

    def __call__(self) -> float:
        return self._now

    def advance(self, seconds: float) -> float:
        self._now += seconds
        return self._now


@dataclass(frozen=True)
class ServerIdentity:
    """The bridge's own signing key; the verification key is public."""

    signing_secret: bytes
    signing_public: bytes

    @classmethod
    def generate(cls, rng: Randomness = SYSTEM_RANDOMNESS) -> "ServerIdentity":
        secret = generate_signing_secret(rng)
        return cls(signing_secret=secret, signing_public=public_from_secret(secret))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ServerIdentity":
        with open(path, "r", encoding="ascii") as handle:
            secret = bytes.fromhex(handle.read().strip())
        return cls(signing_secret=secret, signing_public=public_from_secret(secret))

    def save(self, path: str | os.PathLike) -> None:
        fd = os.open(os.fspath(path), os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w", encoding="ascii") as handle:
            handle.write(self.signing_secret.hex() + "\n")

    @property
    def verification_key(self) -> str:
        return self.signing_public.hex()


@dataclass
class Session:
    token: str
    wallet: str
    encryption_public: bytes
    expires_at: int


@dataclass
class ChallengeRecord:
    nonce: str
    wallet: str
    message: str
    issued_at: int
    expires_at: int
    consumed: bool = False


@dataclass(frozen=True)
class StoredClaims:
    """Everything the server keeps for one (wallet, issuer) pair. Latest
    submission wins; re-submission replaces the record."""

    wallet: str
    issuer: str
    ciphertexts: tuple[Ciphertext, ...]
    descriptors: tuple[PayloadDescriptor, ...]
    h1: bytes
    bridge_record: BridgeRecord

    def to_wire(self) -> dict:
        return {
            "wallet": self.wallet,
            "issuer": self.issuer,
            "ciphertexts": [ciphertext_to_wire(ct) for ct in self.ciphertexts],
            "descriptors": [d.to_wire() for d in self.descriptors],
            "h1": self.h1.hex(),
            "bridge_record": self.bridge_record.to_wire(),
        }

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "StoredClaims":
        return cls(
            wallet=wire["wallet"],
            issuer=wire["issuer"],
            ciphertexts=tuple(ciphertext_from_wire(ct) for ct in wire["ciphertexts"]),
            descriptors=tuple(PayloadDescriptor.from_wire(d) for d in wire["descriptors"]),
            h1=bytes.fromhex(wire["h1"]),
            bridge_record=BridgeRecord.from_wire(wire["bridge_record"]),
        )


@dataclass(frozen=True)
class FetchResult:
    issuer: str
    h1: bytes
    ciphertexts: tuple[Ciphertext, ...]
    descriptors: tuple[PayloadDescriptor, ...]
    bridge_record: BridgeRecord


@dataclass
class _WalletState:
    issuers: list[str] = field(default_factory=list)
    records: dict[str, StoredClaims] = field(default_factory=dict)


def _http_deliver(url: str, payload: dict) -> None:
    response = httpx.post(url, json=payload, timeout=10.0)
    response.raise_for_status()


class BridgeService:
    """Transport-independent bridge server state machine.

    Concurrency: challenge/session/config maps share one lock; mutations
    of a single wallet's storage are serialized by a per-wallet lock;
    ledger appends are serialized inside the ledger itself.
    """

    def __init__(
        self,
        identity: ServerIdentity,
        ledger: Ledger,
        *,
        origin: str = "https://bridge.local",
        clock: Callable[[], float] = time.time,
        rng: Randomness = SYSTEM_RANDOMNESS,
        store_path: str | os.PathLike | None = None,
        deliver: Callable[[str, dict], None] = _http_deliver,
    ):
        self.identity = identity
        self.ledger = ledger
        self.origin = origin
        self._clock = clock
        self._rng = rng
        self._store_path = os.fspath(store_path) if store_path else None
        self._deliver = deliver
        self._lock = threading.RLock()
        self._wallet_locks: dict[str, threading.Lock] = {}
        self._challenges: dict[str, ChallengeRecord] = {}
        self._sessions: dict[str, Session] = {}
        self._wallets: dict[str, _WalletState] = {}
        self._configs: dict[str, PresentationConfig] = {}
        self._load_state()

    # -- time ---------------------------------------------------------------

    def now(self) -> int:
        return int(self._clock())

    # -- persistence ----------------------------------------------------------

    def _load_state(self) -> None:
        if not self._store_path or not os.path.exists(self._store_path):
            return
        with open(self._store_path, "r", encoding="utf-8") as handle:
            state = json.load(handle)
        for address, wallet_state in state.get("wallets", {}).items():
            self._wallets[address] = _WalletState(
                issuers=list(wallet_state["issuers"]),
                records={
                    issuer: StoredClaims.from_wire(wire)
                    for issuer, wire in wallet_state["records"].items()
                },
            )
        for config_id, wire in state.get("configs", {}).items():
            self._configs[config_id] = PresentationConfig.from_wire(wire)

    def _persist_state(self) -> None:
        if not self._store_path:
            return
        state = {
            "wallets": {
                address: {
                    "issuers": wallet_state.issuers,
                    "records": {
                        issuer: stored.to_wire() for issuer, stored in wallet_state.records.items()
                    },
                }
                for address, wallet_state in self._wallets.items()
            },
            "configs": {config_id: c.to_wire() for config_id, c in self._configs.items()},
        }
        tmp_path = self._store_path + ".tmp"
        with open(tmp_path, "w", encoding="utf-8") as handle:
            json.dump(state, handle, separators=(",", ":"), sort_keys=True)
        os.replace(tmp_path, self._store_path)

    def _wallet_lock(self, wallet: str) -> threading.Lock:
        with self._lock:
            return self._wallet_locks.setdefault(wallet, threading.Lock())

    # -- authentication ---------------------------------------------------------

    def create_challenge(self, wallet: str) -> tuple[str, str]:
        """Issue a single-use sign-in nonce and the text to sign (the
        client appends its Encryption-Key line before signing)."""
        try:
            wallet = normalize_address(wallet)
        except ValueError as exc:
            raise MalformedSubmission(str(exc)) from exc
        nonce = new_challenge_nonce(self._rng)
        issued_at = self.now()
        message = (
            f"{self.origin} wants you to link your wallet:\n"
            f"{wallet}\n"
            f"\n"
            f"Nonce: {nonce}\n"
            f"Issued-At: {issued_at}"
        )
        record = ChallengeRecord(
            nonce=nonce,
            wallet=wallet,
            message=message,
            issued_at=issued_at,
            expires_at=issued_at + CHALLENGE_LIFETIME,
        )
        with self._lock:
            self._prune_expired()
            self._challenges[nonce] = record
        return nonce, message

    def verify_auth(
        self, wallet: str, encryption_public: bytes, signature: RecoverableSignature
    ) -> Session:
        """Check the challenge signature, bind (wallet, encryption key),
        and open a session."""
        try:
            wallet = normalize_address(wallet)
        except ValueError as exc:
            raise MalformedSubmission(str(exc)) from exc
        if len(encryption_public) != 32:
            raise MalformedSubmission("encryption_public must be 32 bytes")
        now = self.now()
        with self._lock:
            candidates = sorted(
                (c for c in self._challenges.values() if c.wallet == wallet),
                key=lambda c: c.issued_at,
                reverse=True,
            )
        for challenge in candidates:
            message = bind_encryption_key(challenge.message, encryption_public)
            try:
                recovered = derive_address(recover(message, signature))
            except Exception:
                continue
            if recovered != wallet:
                continue
            # Signature matches this challenge; enforce single use + expiry.
            with self._lock:
                if challenge.consumed:
                    raise ReplayDetected("challenge nonce already used")
                if now > challenge.expires_at:
                    raise AuthFailed("challenge expired")
                challenge.consumed = True
                session = Session(
                    token=self._rng.random_bytes(32).hex(),
                    wallet=wallet,
                    encryption_public=bytes(encryption_public),
                    expires_at=now + SESSION_LIFETIME,
                )
                self._sessions[session.token] = session
                return session
        raise AuthFailed("signature does not match any outstanding challenge for this wallet")

    def session_for(self, token: Optional[str]) -> Session:
        if not token:
            raise AuthFailed("missing session")
        with self._lock:
            session = self._sessions.get(token)
        if session is None:
            raise AuthFailed("unknown session")
        if self.now() > session.expires_at:
            raise SessionExpired("session expired; sign in again")
        return session

    def _prune_expired(self) -> None:
        # Called under self._lock. Consumed records are kept until expiry
        # so replays are reported as such rather than as unknown.
        now = self.now()
        horizon = CHALLENGE_LIFETIME * 4
        for nonce in [n for n, c in self._challenges.items() if now > c.expires_at + horizon]:
            del self._challenges[nonce]
        for token in [t for t, s in self._sessions.items() if now > s.expires_at + SESSION_LIFETIME]:
            del self._sessions[token]

    # -- claims custody -----------------------------------------------------------

    def _validate_submission(self, submission: BridgeSubmission) -> None:
        total = len(submission.payload_descriptors)
        for position, descriptor in enumerate(submission.payload_descriptors, start=1):
            if descriptor.index != position:
                raise MalformedSubmission("payload indices must be contiguous from 1")
            expected = PAYLOAD_KIND_PROVENANCE if position == total else PAYLOAD_KIND_ATTRIBUTE
            if descriptor.kind != expected:
                raise MalformedSubmission(
                    f"descriptor {position} has kind {descriptor.kind!r}, expected {expected!r}"
                )
            if expected == PAYLOAD_KIND_ATTRIBUTE and not (
                descriptor.claim_name and descriptor.attribute_path
            ):
                raise MalformedSubmission(f"descriptor {position} lacks claim/attribute labels")

    def store_claims(self, session: Session, submission: BridgeSubmission) -> BridgeRecord:
        """Persist the ciphertexts, attest (wallet, h2), and log the event."""
        if submission.encryption_public != session.encryption_public:
            raise AuthFailed("submission encryption key does not match the session binding")
        self._validate_submission(submission)
        wallet = session.wallet
        with self._wallet_lock(wallet):
            h2 = sha512(ciphertext_bytes(submission.ciphertexts[-1]) + submission.h1)
            attested = BridgeRecord.attested_bytes(wallet, h2)
            signature = sign(self.identity.signing_secret, attested)
            timestamp = self.now()
            ref = self.ledger.append(
                LedgerEntry(
                    seq=0,
                    kind=LEDGER_KIND_BRIDGE,
                    wallet_ref=wallet_ref_for(wallet),
                    timestamp=timestamp,
                    h2=h2,
                    server_signature=signature,
                )
            )
            record = BridgeRecord(
                wallet=wallet,
                h2=h2,
                server_signature=signature,
                ledger_ref=ref,
                created_at=timestamp,
            )
            with self._lock:
                state = self._wallets.setdefault(wallet, _WalletState())
                if submission.issuer not in state.issuers:
                    state.issuers.append(submission.issuer)
                state.records[submission.issuer] = StoredClaims(
                    wallet=wallet,
                    issuer=submission.issuer,
                    ciphertexts=submission.ciphertexts,
                    descriptors=submission.payload_descriptors,
                    h1=submission.h1,
                    bridge_record=record,
                )
                self._persist_state()
        return record

    def list_claims(self, session: Session) -> list[dict]:
        """Issuer summaries for the session wallet; no ciphertext bodies."""
        with self._lock:
            state = self._wallets.get(session.wallet)
            if state is None:
                return []
            summaries = []
            for issuer in state.issuers:
                stored = state.records[issuer]
                summaries.append(
                    {
                        "issuer": issuer,
                        "payload_count": len(stored.descriptors),
                        "descriptors": [d.to_wire() for d in stored.descriptors],
                        "bridge_record": stored.bridge_record.to_wire(),
                    }
                )
            return summaries

    def _stored_for(self, wallet: str, issuer: str) -> StoredClaims:
        with self._lock:
            state = self._wallets.get(wallet)
            stored = state.records.get(issuer) if state else None
        if stored is None:
            raise NotFound(f"no bridged claims for issuer {issuer!r}")
        return stored

    def fetch_claims(
        self, session: Session, issuer: str, indices: Optional[Sequence[int]] = None
    ) -> FetchResult:
        """Return stored ciphertexts, optionally only the named payload
        indices (selective fetch for a presentation request)."""
        stored = self._stored_for(session.wallet, issuer)
        ciphertexts = stored.ciphertexts
        descriptors = stored.descriptors
        if indices is not None:
            wanted = set(indices)
            pairs = [
                (ct, d) for ct, d in zip(ciphertexts, descriptors) if d.index in wanted
            ]
            ciphertexts = tuple(ct for ct, _ in pairs)
            descriptors = tuple(d for _, d in pairs)
        return FetchResult(
            issuer=issuer,
            h1=stored.h1,
            ciphertexts=ciphertexts,
            descriptors=descriptors,
            bridge_record=stored.bridge_record,
        )

    def delete_claims(self, session: Session, issuer: str) -> None:
        """Irrecoverably drop the ciphertexts; ledger entries remain (they
        reference no personal data once the ciphertexts are gone)."""
        wallet = session.wallet
        with self._wallet_lock(wallet):
            with self._lock:
                state = self._wallets.get(wallet)
                if state is None or issuer not in state.records:
                    raise NotFound(f"no bridged claims for issuer {issuer!r}")
                del state.records[issuer]
                state.issuers.remove(issuer)
                self._persist_state()

    # -- presentations ---------------------------------------------------------

    def register_config(
        self,
        verifier_id: str,
        callback_url: str,
        requests: Sequence[DisclosureRequest],
    ) -> PresentationConfig:
        if not verifier_id or not callback_url:
            raise MalformedSubmission("verifier_id and callback_url are required")
        if not requests:
            raise MalformedSubmission("configuration carries no requests")
        try:
            config = PresentationConfig(
                config_id=self._rng.random_bytes(16).hex(),
                verifier_id=verifier_id,
                callback_url=callback_url,
                requests=tuple(requests),
                created_at=self.now(),
            )
        except ValueError as exc:
            raise MalformedSubmission(str(exc)) from exc
        with self._lock:
            self._configs[config.config_id] = config
            self._persist_state()
        return config

    def get_config(self, config_id: str) -> PresentationConfig:
        with self._lock:
            config = self._configs.get(config_id)
        if config is None:
            raise NotFound(f"unknown presentation configuration {config_id!r}")
        return config

    @staticmethod
    def _covers(request: DisclosureRequest, item_mode: str) -> bool:
        if item_mode == request.mode:
            return True
        # privacy-favouring upgrade only
        return request.mode == "plain" and item_mode == "blinded"

    def submit_presentation(
        self, session: Session, config_id: str, disclosure: DisclosureSet
    ) -> tuple[str, str, dict]:
        """Verify consent + coverage, deliver to the verifier's callback,
        and log the interaction. Returns (token, redirect_url, payload)."""
        config = self.get_config(config_id)
        if disclosure.config_id != config_id:
            raise MalformedSubmission("disclosure names a different configuration")
        if disclosure.wallet != session.wallet:
            raise AuthFailed("disclosure wallet does not match the session wallet")
        if disclosure.consent_signature is None:
            raise ConsentInvalid("disclosure is not consent-signed")
        try:
            signer = derive_address(recover(disclosure.consent_message(), disclosure.consent_signature))
        except Exception as exc:
            raise ConsentInvalid(f"consent signature does not recover: {exc}") from exc
        if signer != disclosure.wallet:
            raise ConsentInvalid("consent signature was not made by the presenting wallet")

        items_by_key = {item.key(): item for item in disclosure.items}
        for request in config.requests:
            item = items_by_key.get(request.key())
            if item is None or not self._covers(request, item.mode):
                raise IncompleteDisclosure(request.attribute_path)

        issuers = sorted({item.issuer for item in disclosure.items})
        bridge_records = []
        for issuer in issuers:
            stored = self._stored_for(session.wallet, issuer)
            bridge_records.append(
                {
                    "issuer": issuer,
                    "bridge_record": stored.bridge_record.to_wire(),
                    "provenance_ciphertext": ciphertext_to_wire(stored.ciphertexts[-1]),
                    "h1": stored.h1.hex(),
                }
            )

        token = new_redirect_token(self._rng)
        payload = {
            "token": token,
            "wallet": disclosure.wallet,
            "config_id": config_id,
            "items": [item.to_wire() for item in disclosure.items],
            "consent_signature": disclosure.consent_signature.to_hex(),
            "bridge_records": bridge_records,
        }
        try:
            self._deliver(config.callback_url, payload)
        except Exception as exc:
            # No ledger entry for failed deliveries.
            raise DeliveryFailed(f"callback delivery to {config.callback_url} failed: {exc}") from exc
        self.ledger.append(
            LedgerEntry(
                seq=0,
                kind=LEDGER_KIND_PRESENTATION,
                wallet_ref=wallet_ref_for(disclosure.wallet),
                timestamp=self.now(),
                verifier_id=config.verifier_id,
            )
        )
        separator = "&" if "?" in config.callback_url else "?"
        redirect_url = f"{config.callback_url}{separator}token={token}"
        return token, redirect_url, payload

    # -- public key ---------------------------------------------------------------

    def verification_key(self) -> str:
        return self.identity.verification_key
