"""Relying-party verification library.

Predefined checks over delivered presentations: consent signature,
attestation (server signature + commitment recomputation + ledger
presence), blinded-value verification on later reveal, and configurable
sybil-resistance scoring over the interaction ledger. Policies are
verifier-supplied data, not protocol mandates.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence

from .crypto.hashing import sha512, verify_blinded as _verify_blinded_digest
from .crypto.rng import Randomness, SYSTEM_RANDOMNESS
from .crypto.sealedbox import Ciphertext
from .crypto.signing import derive_address, recover
from .errors import MalformedPayload, TokenMismatch
from .ledger import Ledger
from .model import (
    BridgeRecord,
    DisclosureRequest,
    DisclosureSet,
    LEDGER_KIND_BRIDGE,
    LEDGER_KIND_PRESENTATION,
    PresentationConfig,
    Scalar,
    ciphertext_bytes,
    ciphertext_from_wire,
    wallet_ref_for,
)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok

    @classmethod
    def passed(cls) -> "CheckResult":
        return cls(ok=True)

    @classmethod
    def failed(cls, reason: str) -> "CheckResult":
        return cls(ok=False, reason=reason)


@dataclass(frozen=True)
class SybilPolicy:
    """Thresholds a relying party demands of a wallet's ledger trail."""

    min_bridge_age: int = 0  # seconds between first bridge entry and now
    min_uses: int = 0  # presentations logged
    min_distinct_verifiers: int = 0

    def __post_init__(self):
        if min(self.min_bridge_age, self.min_uses, self.min_distinct_verifiers) < 0:
            raise ValueError("policy thresholds must be non-negative")


@dataclass(frozen=True)
class SybilReport:
    age: int
    uses: int
    distinct_verifiers: int
    passed: bool

    def to_wire(self) -> dict:
        return {
            "age": self.age,
            "uses": self.uses,
            "distinct_verifiers": self.distinct_verifiers,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class VerifiedPresentation:
    disclosure: DisclosureSet
    consent_ok: bool
    attestation_ok: bool
    ledger_ok: bool
    sybil: SybilReport
    reasons: tuple[str, ...] = ()

    @property
    def accepted(self) -> bool:
        return self.consent_ok and self.attestation_ok and self.ledger_ok and self.sybil.passed

    def to_wire(self) -> dict:
        return {
            "accepted": self.accepted,
            "consent_ok": self.consent_ok,
            "attestation_ok": self.attestation_ok,
            "ledger_ok": self.ledger_ok,
            "sybil": self.sybil.to_wire(),
            "reasons": list(self.reasons),
            "wallet": self.disclosure.wallet,
            "items": [item.to_wire() for item in self.disclosure.items],
        }


# -- configuration building -----------------------------------------------------

def build_config(
    verifier_id: str,
    callback_url: str,
    requests: Sequence[DisclosureRequest],
    *,
    rng: Randomness = SYSTEM_RANDOMNESS,
    now: Optional[int] = None,
) -> PresentationConfig:
    """Validate and assemble a presentation configuration locally. On
    registration the server assigns its own config_id."""
    return PresentationConfig(
        config_id=rng.random_bytes(16).hex(),
        verifier_id=verifier_id,
        callback_url=callback_url,
        requests=tuple(requests),
        created_at=int(time.time()) if now is None else now,
    )


# -- component checks -------------------------------------------------------------

def verify_consent(disclosure: DisclosureSet) -> CheckResult:
    """True iff the consent signature recovers to the presenting wallet
    over the canonical (config_id, items) bytes."""
    if disclosure.consent_signature is None:
        return CheckResult.failed("disclosure carries no consent signature")
    try:
        signer = derive_address(recover(disclosure.consent_message(), disclosure.consent_signature))
    except Exception as exc:
        return CheckResult.failed(f"consent signature does not recover: {exc}")
    if signer != disclosure.wallet:
        return CheckResult.failed(
            f"consent signed by {signer}, presented wallet is {disclosure.wallet}"
        )
    return CheckResult.passed()


def _check_record_signature(
    record: BridgeRecord,
    server_key: bytes,
    provenance_ciphertext: Ciphertext,
    h1: bytes,
    wallet: Optional[str] = None,
) -> CheckResult:
    """Attestation leg: sig recovers to the bridge's key and h2 recomputes
    from the fetched ciphertext + h1."""
    if wallet is not None and record.wallet != wallet:
        return CheckResult.failed("bridge record belongs to a different wallet")
    recomputed = sha512(ciphertext_bytes(provenance_ciphertext) + h1)
    if recomputed != record.h2:
        return CheckResult.failed("h2 does not recompute from ciphertext and h1")
    attested = BridgeRecord.attested_bytes(record.wallet, record.h2)
    try:
        signer = recover(attested, record.server_signature)
    except Exception as exc:
        return CheckResult.failed(f"server signature does not recover: {exc}")
    if signer != server_key:
        return CheckResult.failed("server signature recovers to an unknown key")
    return CheckResult.passed()


def _check_record_ledger(record: BridgeRecord, ledger: Ledger) -> CheckResult:
    """Ledger leg: h2 is logged, and the referenced entry matches the
    record field-for-field (seq, content hash, kind, h2, timestamp)."""
    present, _ref = ledger.contains_h2(record.h2)
    if not present:
        return CheckResult.failed("h2 is not logged on the ledger")
    if record.ledger_ref.backend_id != ledger.backend_id:
        return CheckResult.failed("ledger_ref names a different backend")
    entry = ledger.entry_at(record.ledger_ref.seq)
    if entry is None:
        return CheckResult.failed(f"ledger has no entry at seq {record.ledger_ref.seq}")
    if entry.kind != LEDGER_KIND_BRIDGE:
        return CheckResult.failed("referenced ledger entry is not a bridge entry")
    if entry.h2 != record.h2:
        return CheckResult.failed("referenced ledger entry carries a different h2")
    if entry.content_hash() != record.ledger_ref.content_hash:
        return CheckResult.failed("ledger_ref content hash does not match the entry")
    if entry.timestamp != record.created_at:
        return CheckResult.failed("record created_at does not match the ledger entry")
    if entry.wallet_ref != wallet_ref_for(record.wallet):
        return CheckResult.failed("ledger entry references a different wallet")
    return CheckResult.passed()


def verify_attestation(
    record: BridgeRecord,
    server_key: bytes,
    provenance_ciphertext: Ciphertext,
    h1: bytes,
    ledger: Ledger,
) -> CheckResult:
    """Full attestation check: server signature, h2 recomputation, and
    ledger presence/consistency."""
    signature_leg = _check_record_signature(record, server_key, provenance_ciphertext, h1)
    if not signature_leg:
        return signature_leg
    return _check_record_ledger(record, ledger)


def verify_blinded(digest: bytes | str, salt: bytes | str, revealed_value: Scalar) -> bool:
    """Check a salted commitment against a later-revealed value."""
    if isinstance(digest, str):
        digest = bytes.fromhex(digest)
    if isinstance(salt, str):
        salt = bytes.fromhex(salt)
    return _verify_blinded_digest(digest, salt, revealed_value)


def sybil_score(wallet_ref: str, ledger: Ledger, policy: SybilPolicy, now: int) -> SybilReport:
    """Score a wallet's trail: age since the earliest bridge entry, number
    of logged presentations, and distinct verifiers seen."""
    bridge_entries = ledger.entries_for(wallet_ref, kind=LEDGER_KIND_BRIDGE)
    presentations = ledger.entries_for(wallet_ref, kind=LEDGER_KIND_PRESENTATION)
    age = (now - bridge_entries[0].timestamp) if bridge_entries else 0
    uses = len(presentations)
    distinct = len({entry.verifier_id for entry in presentations})
    passed = (
        age >= policy.min_bridge_age
        and uses >= policy.min_uses
        and distinct >= policy.min_distinct_verifiers
    )
    return SybilReport(age=age, uses=uses, distinct_verifiers=distinct, passed=passed)


# -- callback processing ------------------------------------------------------------

_CALLBACK_FIELDS = ("token", "wallet", "config_id", "items", "consent_signature", "bridge_records")


def parse_callback(payload: Mapping[str, Any]) -> tuple[str, DisclosureSet, list[dict]]:
    """Validate the callback schema; returns (token, disclosure, records)."""
    if not isinstance(payload, Mapping):
        raise MalformedPayload("callback payload must be a JSON object")
    for key in _CALLBACK_FIELDS:
        if key not in payload:
            raise MalformedPayload(f"callback payload lacks field: {key}")
    try:
        disclosure = DisclosureSet.from_wire(
            {
                "config_id": payload["config_id"],
                "wallet": payload["wallet"],
                "items": payload["items"],
                "consent_signature": payload["consent_signature"],
            }
        )
    except (ValueError, TypeError) as exc:
        raise MalformedPayload(f"callback payload malformed: {exc}") from exc
    records = payload["bridge_records"]
    if not isinstance(records, list) or not all(isinstance(r, Mapping) for r in records):
        raise MalformedPayload("bridge_records must be a list of objects")
    token = payload["token"]
    if not isinstance(token, str) or not token:
        raise MalformedPayload("token must be a non-empty string")
    return token, disclosure, list(records)


def receive_presentation(
    payload: Mapping[str, Any],
    server_key: bytes | str,
    ledger: Ledger,
    policy: SybilPolicy,
    *,
    expected_token: Optional[str] = None,
    now: Optional[int] = None,
) -> VerifiedPresentation:
    """Run every check over a delivered presentation and aggregate the
    verdicts; acceptance is the conjunction of all four."""
    token, disclosure, records = parse_callback(payload)
    if expected_token is not None and token != expected_token:
        raise TokenMismatch("delivered token does not match the expected token")
    if isinstance(server_key, str):
        server_key = bytes.fromhex(server_key)

    reasons: list[str] = []
    consent = verify_consent(disclosure)
    if not consent:
        reasons.append(f"consent: {consent.reason}")

    attestation_ok = bool(records)
    ledger_ok = bool(records)
    if not records:
        reasons.append("attestation: no bridge records delivered")
    disclosed_issuers = {item.issuer for item in disclosure.items}
    record_issuers = {wire.get("issuer") for wire in records}
    if records and record_issuers != disclosed_issuers:
        attestation_ok = False
        reasons.append("attestation: bridge records do not cover the disclosed issuers")
    for wire in records:
        try:
            record = BridgeRecord.from_wire(wire.get("bridge_record", {}))
            ciphertext = ciphertext_from_wire(wire.get("provenance_ciphertext", {}))
            h1 = bytes.fromhex(wire["h1"])
            if len(h1) != 64:
                raise ValueError("h1 must be 64 bytes")
        except (ValueError, TypeError, KeyError) as exc:
            raise MalformedPayload(f"bridge record malformed: {exc}") from exc
        signature_leg = _check_record_signature(
            record, server_key, ciphertext, h1, wallet=disclosure.wallet
        )
        if not signature_leg:
            attestation_ok = False
            reasons.append(f"attestation[{wire.get('issuer')}]: {signature_leg.reason}")
        ledger_leg = _check_record_ledger(record, ledger)
        if not ledger_leg:
            ledger_ok = False
            reasons.append(f"ledger[{wire.get('issuer')}]: {ledger_leg.reason}")

    sybil = sybil_score(
        wallet_ref_for(disclosure.wallet),
        ledger,
        policy,
        now=int(time.time()) if now is None else now,
    )
    if not sybil.passed:
        reasons.append(
            f"sybil: age={sybil.age} uses={sybil.uses} distinct={sybil.distinct_verifiers} "
            f"below policy thresholds"
        )
    return VerifiedPresentation(
        disclosure=disclosure,
        consent_ok=consent.ok,
        attestation_ok=attestation_ok,
        ledger_ok=ledger_ok,
        sybil=sybil,
        reasons=tuple(reasons),
    )
