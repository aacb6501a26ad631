"""Client-side claims processing.

Parses credential imports, segregates the issuer from the claims, splits
claims into flat scalar attributes, builds the attribute + provenance
payloads, encrypts them to the holder's key, and assembles disclosures.
The server never sees any of the plaintext handled here.
"""
from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence, Union

from .canonical import canonicalize, parse
from .crypto.hashing import blind, sha512
from .crypto.predicates import evaluate_predicate
from .crypto.rng import Randomness, SYSTEM_RANDOMNESS, new_salt
from .crypto.sealedbox import Ciphertext, decrypt, encrypt
from .crypto.signing import sign
from .errors import CredentialImportError, MissingAttribute, ModeViolation
from .model import (
    Attribute,
    BlindedValue,
    Claim,
    CredentialImport,
    DisclosedItem,
    DisclosureSet,
    PAYLOAD_KIND_ATTRIBUTE,
    PAYLOAD_KIND_PROVENANCE,
    Payload,
    PayloadBundle,
    PresentationConfig,
    Scalar,
    WalletIdentity,
    _hex_field,
    _int_field,
    _str_field,
    ciphertext_from_wire,
    ciphertext_to_wire,
    normalize_address,
)

IMPORT_FORMATS = ("oidc-json", "jwt")

# Registered JWT members grouped into the reserved transport-metadata claim.
_JWT_REGISTERED = ("iat", "exp", "nbf", "aud", "sub")
META_CLAIM = "_meta"


# -- parsing and flattening ---------------------------------------------------

def _flatten(value: Any, path: str, out: list[Attribute]) -> None:
    if isinstance(value, Mapping):
        if not value:
            raise CredentialImportError(f"empty object at {path!r} has no attribute leaves")
        for key, child in value.items():
            if not isinstance(key, str) or not key:
                raise CredentialImportError(f"non-string member name under {path!r}")
            _flatten(child, f"{path}.{key}", out)
    elif isinstance(value, Sequence) and not isinstance(value, (str, bytes)):
        if not value:
            raise CredentialImportError(f"empty array at {path!r} has no attribute leaves")
        for position, child in enumerate(value):
            _flatten(child, f"{path}.{position}", out)
    elif value is None:
        raise CredentialImportError(f"null value at {path!r}; attributes must be scalars")
    else:
        out.append(Attribute(path=path, value=value))


def _claim_from_member(name: str, value: Any) -> Claim:
    attributes: list[Attribute] = []
    _flatten(value, name, attributes)
    return Claim(name=name, attributes=tuple(attributes))


def _claims_from_object(document: Mapping[str, Any]) -> tuple[str, tuple[Claim, ...]]:
    issuer = document.get("iss")
    if not isinstance(issuer, str) or not issuer:
        raise CredentialImportError("credential has no issuer (`iss`) member")
    claims = []
    for name, value in document.items():
        if name == "iss":
            continue
        claims.append(_claim_from_member(name, value))
    if not claims:
        raise CredentialImportError("credential carries no claims besides the issuer")
    return issuer, tuple(claims)


def _decode_jwt_payload(raw: bytes) -> Mapping[str, Any]:
    parts = raw.decode("ascii", errors="strict").strip().split(".")
    if len(parts) != 3:
        raise CredentialImportError("JWT must be a three-part compact serialization")
    payload_b64 = parts[1]
    padded = payload_b64 + "=" * (-len(payload_b64) % 4)
    try:
        decoded = base64.urlsafe_b64decode(padded)
        document = json.loads(decoded)
    except (ValueError, UnicodeDecodeError) as exc:
        raise CredentialImportError(f"JWT payload does not decode: {exc}") from exc
    if not isinstance(document, Mapping):
        raise CredentialImportError("JWT payload is not a JSON object")
    return document


def parse_import(raw: bytes | str, format: str) -> CredentialImport:
    """Parse a credential file into issuer + flattened claims.

    The upstream issuer's own signature (JWT case) is retained inside
    ``raw`` but deliberately not validated: the bridge attests provenance,
    not issuer signatures.
    """
    if isinstance(raw, str):
        raw = raw.encode("utf-8")
    if format == "oidc-json":
        try:
            document = json.loads(raw)
        except (ValueError, UnicodeDecodeError) as exc:
            raise CredentialImportError(f"credential is not valid JSON: {exc}") from exc
        if not isinstance(document, Mapping):
            raise CredentialImportError("credential must be a JSON object")
        issuer, claims = _claims_from_object(document)
    elif format == "jwt":
        try:
            document = _decode_jwt_payload(raw)
        except UnicodeDecodeError as exc:
            raise CredentialImportError("JWT must be ASCII compact serialization") from exc
        registered = {k: v for k, v in document.items() if k in _JWT_REGISTERED}
        body = {k: v for k, v in document.items() if k not in _JWT_REGISTERED}
        issuer, claims = _claims_from_object(body)
        if registered:
            claims = claims + (_claim_from_member(META_CLAIM, registered),)
    else:
        raise CredentialImportError(f"unknown import format: {format!r}")
    try:
        return CredentialImport(raw=bytes(raw), issuer=issuer, claims=claims)
    except ValueError as exc:
        raise CredentialImportError(str(exc)) from exc


# -- payload construction -----------------------------------------------------

def _attribute_payload_body(issuer: str, claim: Claim, attribute: Attribute) -> bytes:
    return canonicalize(
        {
            "issuer": issuer,
            "claim_name": claim.name,
            "attribute_path": attribute.path,
            "value": attribute.value,
        }
    )


def _provenance_payload_body(credential: CredentialImport) -> bytes:
    return canonicalize(
        {
            "issuer": credential.issuer,
            "claims": [
                {
                    "name": claim.name,
                    "attributes": [{"path": a.path, "value": a.value} for a in claim.attributes],
                }
                for claim in credential.claims
            ],
        }
    )


def build_payloads(credential: CredentialImport) -> PayloadBundle:
    """One payload per attribute (claims in import order, attributes in
    flattened order) plus the single provenance payload carrying the full
    set; h1 commits to the first payload."""
    payloads: list[Payload] = []
    index = 0
    for claim in credential.claims:
        for attribute in claim.attributes:
            index += 1
            payloads.append(
                Payload(
                    index=index,
                    kind=PAYLOAD_KIND_ATTRIBUTE,
                    issuer=credential.issuer,
                    claim_name=claim.name,
                    attribute_path=attribute.path,
                    content=_attribute_payload_body(credential.issuer, claim, attribute),
                )
            )
    payloads.append(
        Payload(
            index=index + 1,
            kind=PAYLOAD_KIND_PROVENANCE,
            issuer=credential.issuer,
            content=_provenance_payload_body(credential),
        )
    )
    return PayloadBundle(payloads=tuple(payloads), h1=sha512(payloads[0].content))


def bundle_from_provenance(issuer: str, provenance_content: bytes) -> PayloadBundle:
    """Rebuild the full bundle from a decrypted provenance payload (the
    losslessness property: the provenance body carries everything)."""
    body = parse(provenance_content)
    claims = tuple(
        Claim(
            name=claim["name"],
            attributes=tuple(Attribute(path=a["path"], value=a["value"]) for a in claim["attributes"]),
        )
        for claim in body["claims"]
    )
    credential = CredentialImport(raw=provenance_content, issuer=body["issuer"], claims=claims)
    return build_payloads(credential)


# -- encrypted submission -----------------------------------------------------

@dataclass(frozen=True)
class PayloadDescriptor:
    """Plaintext-free payload metadata enabling selective fetch later."""

    index: int
    kind: str
    claim_name: Optional[str] = None
    attribute_path: Optional[str] = None

    def to_wire(self) -> dict:
        wire: dict[str, Any] = {"index": self.index, "kind": self.kind}
        if self.claim_name is not None:
            wire["claim_name"] = self.claim_name
        if self.attribute_path is not None:
            wire["attribute_path"] = self.attribute_path
        return wire

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "PayloadDescriptor":
        return cls(
            index=_int_field(wire, "index"),
            kind=_str_field(wire, "kind"),
            claim_name=wire.get("claim_name"),
            attribute_path=wire.get("attribute_path"),
        )


@dataclass(frozen=True)
class BridgeSubmission:
    """What the holder presents to the server: encrypted payloads plus
    plaintext-free metadata. Contains no attribute plaintext anywhere."""

    encryption_public: bytes
    issuer: str
    ciphertexts: tuple[Ciphertext, ...]
    h1: bytes
    payload_descriptors: tuple[PayloadDescriptor, ...]

    def __post_init__(self):
        if len(self.ciphertexts) != len(self.payload_descriptors):
            raise ValueError("ciphertext/descriptor cardinality mismatch")
        if len(self.ciphertexts) < 2:
            raise ValueError("submission needs at least one attribute payload plus provenance")

    def to_wire(self) -> dict:
        return {
            "encryption_public": self.encryption_public.hex(),
            "issuer": self.issuer,
            "ciphertexts": [ciphertext_to_wire(ct) for ct in self.ciphertexts],
            "h1": self.h1.hex(),
            "payload_descriptors": [d.to_wire() for d in self.payload_descriptors],
        }

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "BridgeSubmission":
        ciphertexts = wire.get("ciphertexts")
        descriptors = wire.get("payload_descriptors")
        for name, value in (("ciphertexts", ciphertexts), ("payload_descriptors", descriptors)):
            if not isinstance(value, Sequence) or isinstance(value, (str, bytes)):
                raise ValueError(f"{name} must be a list")
        return cls(
            encryption_public=_hex_field(wire, "encryption_public", 32),
            issuer=_str_field(wire, "issuer"),
            ciphertexts=tuple(ciphertext_from_wire(ct) for ct in ciphertexts),
            h1=_hex_field(wire, "h1", 64),
            payload_descriptors=tuple(PayloadDescriptor.from_wire(d) for d in descriptors),
        )


def encrypt_bundle(
    bundle: PayloadBundle,
    encryption_public: bytes,
    issuer: str,
    rng: Randomness = SYSTEM_RANDOMNESS,
) -> BridgeSubmission:
    """Seal every payload to the holder's encryption key."""
    ciphertexts = tuple(encrypt(encryption_public, p.content, rng) for p in bundle.payloads)
    descriptors = tuple(
        PayloadDescriptor(
            index=p.index, kind=p.kind, claim_name=p.claim_name, attribute_path=p.attribute_path
        )
        for p in bundle.payloads
    )
    return BridgeSubmission(
        encryption_public=bytes(encryption_public),
        issuer=issuer,
        ciphertexts=ciphertexts,
        h1=bundle.h1,
        payload_descriptors=descriptors,
    )


def decrypt_submission(submission: BridgeSubmission, encryption_secret: bytes) -> PayloadBundle:
    """Holder-side inverse of encrypt_bundle (round-trip check helper)."""
    payloads = []
    for descriptor, ciphertext in zip(submission.payload_descriptors, submission.ciphertexts):
        payloads.append(
            Payload(
                index=descriptor.index,
                kind=descriptor.kind,
                issuer=submission.issuer,
                claim_name=descriptor.claim_name,
                attribute_path=descriptor.attribute_path,
                content=decrypt(encryption_secret, ciphertext),
            )
        )
    return PayloadBundle(payloads=tuple(payloads), h1=submission.h1)


# -- disclosure selection -----------------------------------------------------

ValueLookup = Mapping[tuple[str, str, str], Scalar]


def _lookup_from(decrypted: Union[PayloadBundle, Mapping]) -> ValueLookup:
    if isinstance(decrypted, PayloadBundle):
        return decrypted.attribute_values()
    if isinstance(decrypted, Mapping):
        return decrypted
    raise TypeError("decrypted must be a PayloadBundle or an attribute-value mapping")


def select_disclosures(
    config: PresentationConfig,
    decrypted: Union[PayloadBundle, ValueLookup],
    wallet: str,
    choices: Optional[Mapping[tuple[str, str, str], str]] = None,
    rng: Randomness = SYSTEM_RANDOMNESS,
) -> DisclosureSet:
    """Populate one item per request, honouring the mode rules: the holder
    may upgrade plain -> blinded but never downgrade blinded/predicate to
    plain. Returns an unsigned DisclosureSet."""
    values = _lookup_from(decrypted)
    choices = choices or {}
    items: list[DisclosedItem] = []
    for request in config.requests:
        mode = choices.get(request.key(), request.mode)
        if mode != request.mode:
            if not (request.mode == "plain" and mode == "blinded"):
                raise ModeViolation(
                    f"cannot change {request.mode!r} request to {mode!r} for {request.attribute_path}"
                )
        key = request.key()
        if key not in values:
            raise MissingAttribute(request.attribute_path)
        value = values[key]
        if mode == "plain":
            item_value: Union[Scalar, BlindedValue, bool] = value
        elif mode == "blinded":
            salt = new_salt(rng)
            item_value = BlindedValue(salt=salt.hex(), digest=blind(value, salt).hex())
        else:
            item_value = evaluate_predicate(value, request.predicate)
        items.append(
            DisclosedItem(
                issuer=request.issuer,
                claim_name=request.claim_name,
                attribute_path=request.attribute_path,
                mode=mode,
                value=item_value,
            )
        )
    return DisclosureSet(
        config_id=config.config_id,
        wallet=normalize_address(wallet),
        items=tuple(items),
        consent_signature=None,
    )


def sign_consent(identity: WalletIdentity, disclosure: DisclosureSet) -> DisclosureSet:
    """Sign the canonical consent bytes with the wallet key."""
    if identity.address != disclosure.wallet:
        raise ValueError("disclosure wallet does not match the signing identity")
    if not disclosure.items:
        raise ValueError("nothing to consent to")
    signature = sign(identity.signing_secret, disclosure.consent_message())
    return DisclosureSet(
        config_id=disclosure.config_id,
        wallet=disclosure.wallet,
        items=disclosure.items,
        consent_signature=signature,
    )
