"""Protocol data types, canonical serialization, and identifier derivation.

Wire conventions (normative): addresses are lowercase hex with a ``0x``
prefix; digests, salts, keys and signatures are bare lowercase hex. Every
``from_wire`` validates shape and raises ``ValueError``; boundary layers
translate that into their own error class.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Any, Mapping, Optional, Sequence, Union

from .canonical import canonicalize
from .crypto.hashing import sha512
from .crypto.predicates import Predicate
from .crypto.rng import Randomness, SYSTEM_RANDOMNESS
from .crypto.sealedbox import Ciphertext, encryption_public_from_secret, generate_encryption_secret
from .crypto.signing import (
    RecoverableSignature,
    derive_address,
    generate_signing_secret,
    public_from_secret,
)

Scalar = Union[str, int, float, bool]

_ADDRESS_RE = re.compile(r"^0x[0-9a-fA-F]{40}$")

PAYLOAD_KIND_ATTRIBUTE = "attribute"
PAYLOAD_KIND_PROVENANCE = "provenance"
DISCLOSURE_MODES = ("plain", "blinded", "predicate")
LEDGER_KIND_BRIDGE = "bridge"
LEDGER_KIND_PRESENTATION = "presentation"


def is_scalar(value: Any) -> bool:
    return isinstance(value, (str, int, float, bool))


def normalize_address(address: str) -> str:
    """Validate and lowercase a wallet address."""
    if not isinstance(address, str) or not _ADDRESS_RE.match(address):
        raise ValueError(f"malformed wallet address: {address!r}")
    return address.lower()


def wallet_ref_for(address: str) -> str:
    """Ledger reference for a wallet: SHA-512 of the lowercase hex address."""
    return sha512(normalize_address(address).encode("ascii")).hex()


def _hex_field(wire: Mapping[str, Any], key: str, length: int | None = None) -> bytes:
    value = wire.get(key)
    if not isinstance(value, str):
        raise ValueError(f"missing or non-string field: {key}")
    try:
        raw = bytes.fromhex(value)
    except ValueError as exc:
        raise ValueError(f"field {key} is not valid hex") from exc
    if length is not None and len(raw) != length:
        raise ValueError(f"field {key} must be {length} bytes, got {len(raw)}")
    return raw


def _str_field(wire: Mapping[str, Any], key: str) -> str:
    value = wire.get(key)
    if not isinstance(value, str) or not value:
        raise ValueError(f"missing or empty string field: {key}")
    return value


def _int_field(wire: Mapping[str, Any], key: str) -> int:
    value = wire.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"missing or non-integer field: {key}")
    return value


# -- holder identity ---------------------------------------------------------

@dataclass(frozen=True)
class WalletIdentity:
    """Holder key material: one recoverable-signature pair controlling the
    address, one encryption pair for the sealed payloads. The binding
    between the two is only ever established by a signed session message.
    """

    signing_secret: bytes
    signing_public: bytes
    address: str
    encryption_secret: bytes
    encryption_public: bytes

    def __post_init__(self):
        if public_from_secret(self.signing_secret) != self.signing_public:
            raise ValueError("signing_public does not match signing_secret")
        if derive_address(self.signing_public) != self.address:
            raise ValueError("address does not match signing_public")
        if encryption_public_from_secret(self.encryption_secret) != self.encryption_public:
            raise ValueError("encryption_public does not match encryption_secret")

    @classmethod
    def from_secrets(cls, signing_secret: bytes, encryption_secret: bytes) -> "WalletIdentity":
        signing_public = public_from_secret(signing_secret)
        return cls(
            signing_secret=signing_secret,
            signing_public=signing_public,
            address=derive_address(signing_public),
            encryption_secret=encryption_secret,
            encryption_public=encryption_public_from_secret(encryption_secret),
        )

    @classmethod
    def generate(cls, rng: Randomness = SYSTEM_RANDOMNESS) -> "WalletIdentity":
        return cls.from_secrets(generate_signing_secret(rng), generate_encryption_secret(rng))


def bind_encryption_key(challenge_message: str, encryption_public: bytes) -> bytes:
    """The exact bytes a wallet signs during sign-in: the server-issued
    challenge with the holder's encryption key appended, so the signature
    attests the (address, encryption key) binding."""
    return f"{challenge_message}\nEncryption-Key: {encryption_public.hex()}".encode("utf-8")


# -- credential imports ------------------------------------------------------

@dataclass(frozen=True)
class Attribute:
    path: str
    value: Scalar

    def __post_init__(self):
        if not self.path or any(ch.isspace() for ch in self.path):
            raise ValueError(f"attribute path must be non-empty without whitespace: {self.path!r}")
        if not is_scalar(self.value):
            raise ValueError(f"attribute value must be a scalar: {self.path}")


@dataclass(frozen=True)
class Claim:
    name: str
    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        if not self.name:
            raise ValueError("claim name must be non-empty")
        if not self.attributes:
            raise ValueError(f"claim {self.name!r} has no attributes")
        paths = [a.path for a in self.attributes]
        if len(set(paths)) != len(paths):
            raise ValueError(f"claim {self.name!r} has duplicate attribute paths")


@dataclass(frozen=True)
class CredentialImport:
    raw: bytes
    issuer: str
    claims: tuple[Claim, ...]

    def __post_init__(self):
        if not self.issuer:
            raise ValueError("issuer must be non-empty")
        if not self.claims:
            raise ValueError("credential carries no claims")
        names = [c.name for c in self.claims]
        if len(set(names)) != len(names):
            raise ValueError("duplicate claim names in import")

    @property
    def total_attributes(self) -> int:
        return sum(len(c.attributes) for c in self.claims)


# -- payloads ----------------------------------------------------------------

@dataclass(frozen=True)
class Payload:
    index: int  # 1-based
    kind: str
    issuer: str
    content: bytes
    claim_name: Optional[str] = None
    attribute_path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (PAYLOAD_KIND_ATTRIBUTE, PAYLOAD_KIND_PROVENANCE):
            raise ValueError(f"unknown payload kind: {self.kind!r}")
        if self.index < 1:
            raise ValueError("payload index is 1-based")
        if self.kind == PAYLOAD_KIND_ATTRIBUTE and not (self.claim_name and self.attribute_path):
            raise ValueError("attribute payload needs claim_name and attribute_path")
        if self.kind == PAYLOAD_KIND_PROVENANCE and (self.claim_name or self.attribute_path):
            raise ValueError("provenance payload carries no claim/attribute labels")


@dataclass(frozen=True)
class PayloadBundle:
    payloads: tuple[Payload, ...]
    h1: bytes  # SHA-512 of payloads[0].content

    def __post_init__(self):
        if len(self.payloads) < 2:
            raise ValueError("bundle needs at least one attribute payload plus provenance")
        for position, payload in enumerate(self.payloads, start=1):
            if payload.index != position:
                raise ValueError("payload indices must be contiguous from 1")
            expected = PAYLOAD_KIND_PROVENANCE if position == len(self.payloads) else PAYLOAD_KIND_ATTRIBUTE
            if payload.kind != expected:
                raise ValueError(f"payload {position} has kind {payload.kind!r}, expected {expected!r}")
        if sha512(self.payloads[0].content) != self.h1:
            raise ValueError("h1 does not match the first payload")

    @property
    def provenance(self) -> Payload:
        return self.payloads[-1]

    def attribute_values(self) -> dict[tuple[str, str, str], Scalar]:
        """(issuer, claim_name, attribute_path) -> value, parsed back from
        the canonical attribute payload bodies."""
        from .canonical import parse

        values: dict[tuple[str, str, str], Scalar] = {}
        for payload in self.payloads[:-1]:
            body = parse(payload.content)
            values[(body["issuer"], body["claim_name"], body["attribute_path"])] = body["value"]
        return values


# -- ledger records ----------------------------------------------------------

@dataclass(frozen=True)
class LedgerTxRef:
    backend_id: str
    seq: int
    content_hash: str  # hex SHA-512 of the canonical entry

    def to_wire(self) -> dict:
        return {"backend_id": self.backend_id, "seq": self.seq, "content_hash": self.content_hash}

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "LedgerTxRef":
        ref = cls(
            backend_id=_str_field(wire, "backend_id"),
            seq=_int_field(wire, "seq"),
            content_hash=_str_field(wire, "content_hash"),
        )
        _hex_field(wire, "content_hash", 64)
        return ref


@dataclass(frozen=True)
class LedgerEntry:
    seq: int
    kind: str
    wallet_ref: str
    timestamp: int
    h2: Optional[bytes] = None
    server_signature: Optional[RecoverableSignature] = None
    verifier_id: Optional[str] = None

    def __post_init__(self):
        if self.kind == LEDGER_KIND_BRIDGE:
            if self.h2 is None or self.server_signature is None or self.verifier_id is not None:
                raise ValueError("bridge entries carry h2 + server_signature and no verifier_id")
            if len(self.h2) != 64:
                raise ValueError("h2 must be a 64-byte digest")
        elif self.kind == LEDGER_KIND_PRESENTATION:
            if not self.verifier_id or self.h2 is not None or self.server_signature is not None:
                raise ValueError("presentation entries carry verifier_id only")
        else:
            raise ValueError(f"unknown ledger entry kind: {self.kind!r}")
        if len(bytes.fromhex(self.wallet_ref)) != 64:
            raise ValueError("wallet_ref must be a 64-byte digest in hex")

    def to_wire(self) -> dict:
        wire: dict[str, Any] = {
            "seq": self.seq,
            "kind": self.kind,
            "wallet_ref": self.wallet_ref,
            "timestamp": self.timestamp,
        }
        if self.kind == LEDGER_KIND_BRIDGE:
            wire["h2"] = self.h2.hex()
            wire["server_signature"] = self.server_signature.to_hex()
        else:
            wire["verifier_id"] = self.verifier_id
        return wire

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "LedgerEntry":
        kind = _str_field(wire, "kind")
        h2 = _hex_field(wire, "h2", 64) if "h2" in wire else None
        signature = (
            RecoverableSignature.from_hex(_str_field(wire, "server_signature"))
            if "server_signature" in wire
            else None
        )
        return cls(
            seq=_int_field(wire, "seq"),
            kind=kind,
            wallet_ref=_str_field(wire, "wallet_ref"),
            timestamp=_int_field(wire, "timestamp"),
            h2=h2,
            server_signature=signature,
            verifier_id=wire.get("verifier_id"),
        )

    def canonical_bytes(self) -> bytes:
        return canonicalize(self.to_wire())

    def content_hash(self) -> str:
        return sha512(self.canonical_bytes()).hex()

    def with_seq(self, seq: int) -> "LedgerEntry":
        return replace(self, seq=seq)


@dataclass(frozen=True)
class BridgeRecord:
    """Server attestation d1 over (wallet, h2), returned to the holder so
    possession at bridging time can be proven later."""

    wallet: str
    h2: bytes
    server_signature: RecoverableSignature
    ledger_ref: LedgerTxRef
    created_at: int

    @staticmethod
    def attested_bytes(wallet: str, h2: bytes) -> bytes:
        return canonicalize({"h2": h2.hex(), "wallet": wallet})

    def to_wire(self) -> dict:
        return {
            "wallet": self.wallet,
            "h2": self.h2.hex(),
            "server_signature": self.server_signature.to_hex(),
            "ledger_ref": self.ledger_ref.to_wire(),
            "created_at": self.created_at,
        }

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "BridgeRecord":
        ledger_ref = wire.get("ledger_ref")
        if not isinstance(ledger_ref, Mapping):
            raise ValueError("missing ledger_ref")
        return cls(
            wallet=normalize_address(_str_field(wire, "wallet")),
            h2=_hex_field(wire, "h2", 64),
            server_signature=RecoverableSignature.from_hex(_str_field(wire, "server_signature")),
            ledger_ref=LedgerTxRef.from_wire(ledger_ref),
            created_at=_int_field(wire, "created_at"),
        )


# -- presentation configuration (d2) ------------------------------------------

@dataclass(frozen=True)
class DisclosureRequest:
    issuer: str
    claim_name: str
    attribute_path: str
    mode: str
    predicate: Optional[Predicate] = None

    def __post_init__(self):
        if not (self.issuer and self.claim_name and self.attribute_path):
            raise ValueError("request needs issuer, claim_name and attribute_path")
        if self.mode not in DISCLOSURE_MODES:
            raise ValueError(f"unknown disclosure mode: {self.mode!r}")
        if (self.mode == "predicate") != (self.predicate is not None):
            raise ValueError("predicate mode and Predicate presence must agree")

    def key(self) -> tuple[str, str, str]:
        return (self.issuer, self.claim_name, self.attribute_path)

    def to_wire(self) -> dict:
        wire: dict[str, Any] = {
            "issuer": self.issuer,
            "claim_name": self.claim_name,
            "attribute_path": self.attribute_path,
            "mode": self.mode,
        }
        if self.predicate is not None:
            wire["predicate"] = {"operator": self.predicate.operator, "operand": self.predicate.operand}
        return wire

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "DisclosureRequest":
        predicate = None
        if "predicate" in wire:
            pred_wire = wire["predicate"]
            if not isinstance(pred_wire, Mapping):
                raise ValueError("predicate must be a map")
            operand = pred_wire.get("operand")
            if not is_scalar(operand):
                raise ValueError("predicate operand must be a scalar")
            predicate = Predicate(operator=_str_field(pred_wire, "operator"), operand=operand)
        return cls(
            issuer=_str_field(wire, "issuer"),
            claim_name=_str_field(wire, "claim_name"),
            attribute_path=_str_field(wire, "attribute_path"),
            mode=_str_field(wire, "mode"),
            predicate=predicate,
        )


@dataclass(frozen=True)
class PresentationConfig:
    config_id: str  # 16 random bytes, hex
    verifier_id: str
    callback_url: str
    requests: tuple[DisclosureRequest, ...]
    created_at: int

    def __post_init__(self):
        if len(bytes.fromhex(self.config_id)) != 16:
            raise ValueError("config_id must be 16 bytes of hex")
        if not self.verifier_id:
            raise ValueError("verifier_id must be non-empty")
        if not self.callback_url:
            raise ValueError("callback_url must be non-empty")
        if not self.requests:
            raise ValueError("configuration carries no requests")
        keys = [r.key() for r in self.requests]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (issuer, claim, attribute) request")

    def to_wire(self) -> dict:
        return {
            "config_id": self.config_id,
            "verifier_id": self.verifier_id,
            "callback_url": self.callback_url,
            "requests": [r.to_wire() for r in self.requests],
            "created_at": self.created_at,
        }

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "PresentationConfig":
        requests = wire.get("requests")
        if not isinstance(requests, Sequence) or isinstance(requests, (str, bytes)):
            raise ValueError("requests must be a list")
        return cls(
            config_id=_str_field(wire, "config_id"),
            verifier_id=_str_field(wire, "verifier_id"),
            callback_url=_str_field(wire, "callback_url"),
            requests=tuple(DisclosureRequest.from_wire(r) for r in requests),
            created_at=_int_field(wire, "created_at"),
        )


# -- disclosures --------------------------------------------------------------

@dataclass(frozen=True)
class BlindedValue:
    salt: str  # 32 bytes hex
    digest: str  # 64 bytes hex

    def __post_init__(self):
        if len(bytes.fromhex(self.salt)) != 32:
            raise ValueError("blinded salt must be 32 bytes of hex")
        if len(bytes.fromhex(self.digest)) != 64:
            raise ValueError("blinded digest must be 64 bytes of hex")

    def to_wire(self) -> dict:
        return {"salt": self.salt, "digest": self.digest}


@dataclass(frozen=True)
class DisclosedItem:
    issuer: str
    claim_name: str
    attribute_path: str
    mode: str
    value: Union[Scalar, BlindedValue]

    def __post_init__(self):
        if self.mode not in DISCLOSURE_MODES:
            raise ValueError(f"unknown disclosure mode: {self.mode!r}")
        if self.mode == "blinded" and not isinstance(self.value, BlindedValue):
            raise ValueError("blinded item value must be a (salt, digest) pair")
        if self.mode == "predicate" and not isinstance(self.value, bool):
            raise ValueError("predicate item value must be a boolean")
        if self.mode == "plain" and not is_scalar(self.value):
            raise ValueError("plain item value must be a scalar")

    def key(self) -> tuple[str, str, str]:
        return (self.issuer, self.claim_name, self.attribute_path)

    def to_wire(self) -> dict:
        value = self.value.to_wire() if isinstance(self.value, BlindedValue) else self.value
        return {
            "issuer": self.issuer,
            "claim_name": self.claim_name,
            "attribute_path": self.attribute_path,
            "mode": self.mode,
            "value": value,
        }

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "DisclosedItem":
        mode = _str_field(wire, "mode")
        value: Union[Scalar, BlindedValue]
        if mode == "blinded":
            raw = wire.get("value")
            if not isinstance(raw, Mapping):
                raise ValueError("blinded item value must be a map")
            value = BlindedValue(salt=_str_field(raw, "salt"), digest=_str_field(raw, "digest"))
        else:
            raw = wire.get("value")
            if not is_scalar(raw):
                raise ValueError("item value must be a scalar")
            value = raw
        return cls(
            issuer=_str_field(wire, "issuer"),
            claim_name=_str_field(wire, "claim_name"),
            attribute_path=_str_field(wire, "attribute_path"),
            mode=mode,
            value=value,
        )


def consent_bytes(config_id: str, items: Sequence[DisclosedItem]) -> bytes:
    """The exact bytes the holder signs: reconstructable from the rendered
    items alone (what you see is what you sign)."""
    return canonicalize({"config_id": config_id, "items": [item.to_wire() for item in items]})


@dataclass(frozen=True)
class DisclosureSet:
    config_id: str
    wallet: str
    items: tuple[DisclosedItem, ...]
    consent_signature: Optional[RecoverableSignature] = None

    def __post_init__(self):
        if not self.items:
            raise ValueError("disclosure carries no items")

    def consent_message(self) -> bytes:
        return consent_bytes(self.config_id, self.items)

    def to_wire(self) -> dict:
        wire: dict[str, Any] = {
            "config_id": self.config_id,
            "wallet": self.wallet,
            "items": [item.to_wire() for item in self.items],
        }
        if self.consent_signature is not None:
            wire["consent_signature"] = self.consent_signature.to_hex()
        return wire

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "DisclosureSet":
        items = wire.get("items")
        if not isinstance(items, Sequence) or isinstance(items, (str, bytes)):
            raise ValueError("items must be a list")
        signature = (
            RecoverableSignature.from_hex(_str_field(wire, "consent_signature"))
            if "consent_signature" in wire
            else None
        )
        return cls(
            config_id=_str_field(wire, "config_id"),
            wallet=normalize_address(_str_field(wire, "wallet")),
            items=tuple(DisclosedItem.from_wire(i) for i in items),
            consent_signature=signature,
        )


# -- ciphertext wire form ------------------------------------------------------

def ciphertext_to_wire(ciphertext: Ciphertext) -> dict:
    return {
        "body": ciphertext.body.hex(),
        "ephemeral_public": ciphertext.ephemeral_public.hex(),
        "nonce": ciphertext.nonce.hex(),
    }


def ciphertext_from_wire(wire: Mapping[str, Any]) -> Ciphertext:
    return Ciphertext(
        ephemeral_public=_hex_field(wire, "ephemeral_public", 32),
        nonce=_hex_field(wire, "nonce", 24),
        body=_hex_field(wire, "body"),
    )


def ciphertext_bytes(ciphertext: Ciphertext) -> bytes:
    """Canonical byte form of a ciphertext — the h2 preimage component."""
    return canonicalize(ciphertext_to_wire(ciphertext))
