import pytest

from idbridge.crypto.sealedbox import encrypt, generate_encryption_secret, encryption_public_from_secret
from idbridge.crypto.signing import RecoverableSignature, sign
from idbridge.model import (
    Attribute,
    BlindedValue,
    BridgeRecord,
    Claim,
    CredentialImport,
    DisclosedItem,
    DisclosureRequest,
    DisclosureSet,
    LedgerEntry,
    LedgerTxRef,
    PresentationConfig,
    WalletIdentity,
    bind_encryption_key,
    ciphertext_bytes,
    ciphertext_from_wire,
    ciphertext_to_wire,
    consent_bytes,
    normalize_address,
    wallet_ref_for,
)
from idbridge.crypto.predicates import Predicate


def test_wallet_identity_invariants_hold(alice):
    # reconstructing from secrets reproduces the same public material
    rebuilt = WalletIdentity.from_secrets(alice.signing_secret, alice.encryption_secret)
    assert rebuilt == alice


def test_wallet_identity_rejects_mismatched_fields(alice, mallory):
    with pytest.raises(ValueError):
        WalletIdentity(
            signing_secret=alice.signing_secret,
            signing_public=mallory.signing_public,
            address=mallory.address,
            encryption_secret=alice.encryption_secret,
            encryption_public=alice.encryption_public,
        )


def test_normalize_address():
    mixed = "0xF39Fd6e51aad88F6F4ce6aB8827279cffFb92266"
    assert normalize_address(mixed) == mixed.lower()
    for bad in ("f39fd6e51aad88f6f4ce6ab8827279cfffb92266", "0x1234", "0x" + "zz" * 20, 42):
        with pytest.raises(ValueError):
            normalize_address(bad)


def test_wallet_ref_is_sha512_of_lowercase_address(alice):
    import hashlib

    assert wallet_ref_for(alice.address.upper().replace("0X", "0x")) == hashlib.sha512(
        alice.address.encode()
    ).hexdigest()


def test_attribute_and_claim_validation():
    with pytest.raises(ValueError):
        Attribute(path="has space", value=1)
    with pytest.raises(ValueError):
        Attribute(path="x", value=[1, 2])
    with pytest.raises(ValueError):
        Claim(name="c", attributes=())
    with pytest.raises(ValueError):
        Claim(name="c", attributes=(Attribute("p", 1), Attribute("p", 2)))
    with pytest.raises(ValueError):
        CredentialImport(raw=b"{}", issuer="", claims=(Claim("c", (Attribute("p", 1),)),))


def test_bind_encryption_key_layout(alice):
    bound = bind_encryption_key("challenge text", alice.encryption_public)
    assert bound == b"challenge text\nEncryption-Key: " + alice.encryption_public.hex().encode()


def test_ledger_entry_kind_constraints():
    signature = RecoverableSignature(r=b"\x01" * 32, s=b"\x02" * 32, recovery_id=0)
    ref = "ab" * 64
    entry = LedgerEntry(
        seq=1, kind="bridge", wallet_ref=ref, timestamp=10, h2=b"\x00" * 64, server_signature=signature
    )
    assert entry.to_wire()["h2"] == "00" * 64
    assert LedgerEntry.from_wire(entry.to_wire()) == entry
    with pytest.raises(ValueError):
        LedgerEntry(seq=1, kind="bridge", wallet_ref=ref, timestamp=10)
    with pytest.raises(ValueError):
        LedgerEntry(seq=1, kind="presentation", wallet_ref=ref, timestamp=10)
    presentation = LedgerEntry(
        seq=2, kind="presentation", wallet_ref=ref, timestamp=11, verifier_id="bob"
    )
    assert LedgerEntry.from_wire(presentation.to_wire()) == presentation
    with pytest.raises(ValueError):
        LedgerEntry(seq=1, kind="unknown", wallet_ref=ref, timestamp=1, verifier_id="x")


def test_bridge_record_wire_round_trip(alice):
    signature = sign(alice.signing_secret, b"anything")
    record = BridgeRecord(
        wallet=alice.address,
        h2=b"\x11" * 64,
        server_signature=signature,
        ledger_ref=LedgerTxRef(backend_id="memory", seq=3, content_hash="cd" * 64),
        created_at=123,
    )
    assert BridgeRecord.from_wire(record.to_wire()) == record


def test_presentation_config_validation(rng):
    request = DisclosureRequest("iss", "claim", "claim.path", "plain")
    config = PresentationConfig(
        config_id=rng.random_bytes(16).hex(),
        verifier_id="bob",
        callback_url="http://cb",
        requests=(request,),
        created_at=5,
    )
    assert PresentationConfig.from_wire(config.to_wire()) == config
    with pytest.raises(ValueError):
        PresentationConfig(
            config_id="1234", verifier_id="bob", callback_url="http://cb",
            requests=(request,), created_at=5,
        )
    with pytest.raises(ValueError):
        PresentationConfig(
            config_id=rng.random_bytes(16).hex(), verifier_id="bob",
            callback_url="http://cb", requests=(), created_at=5,
        )
    with pytest.raises(ValueError):
        PresentationConfig(
            config_id=rng.random_bytes(16).hex(), verifier_id="bob",
            callback_url="http://cb", requests=(request, request), created_at=5,
        )


def test_disclosure_request_mode_predicate_agreement():
    with pytest.raises(ValueError):
        DisclosureRequest("i", "c", "c.p", "predicate")
    with pytest.raises(ValueError):
        DisclosureRequest("i", "c", "c.p", "plain", Predicate("eq", 1))
    request = DisclosureRequest("i", "c", "c.p", "predicate", Predicate("gte", 10))
    assert DisclosureRequest.from_wire(request.to_wire()) == request


def test_disclosed_item_mode_value_agreement():
    with pytest.raises(ValueError):
        DisclosedItem("i", "c", "c.p", "blinded", "plain-looking")
    with pytest.raises(ValueError):
        DisclosedItem("i", "c", "c.p", "predicate", "yes")
    blinded = DisclosedItem("i", "c", "c.p", "blinded", BlindedValue(salt="00" * 32, digest="11" * 64))
    assert DisclosedItem.from_wire(blinded.to_wire()) == blinded


def test_consent_bytes_reconstructable_from_items(alice):
    items = (
        DisclosedItem("i", "c", "c.a", "plain", "value"),
        DisclosedItem("i", "c", "c.b", "predicate", True),
    )
    disclosure = DisclosureSet(config_id="ab" * 16, wallet=alice.address, items=items)
    assert disclosure.consent_message() == consent_bytes("ab" * 16, items)
    # item order is part of the signed bytes
    assert disclosure.consent_message() != consent_bytes("ab" * 16, tuple(reversed(items)))


def test_empty_disclosure_rejected(alice):
    with pytest.raises(ValueError):
        DisclosureSet(config_id="ab" * 16, wallet=alice.address, items=())


def test_ciphertext_wire_round_trip_and_canonical_bytes(rng):
    secret = generate_encryption_secret(rng)
    ciphertext = encrypt(encryption_public_from_secret(secret), b"payload", rng)
    wire = ciphertext_to_wire(ciphertext)
    assert ciphertext_from_wire(wire) == ciphertext
    assert ciphertext_bytes(ciphertext) == ciphertext_bytes(ciphertext_from_wire(wire))
    assert set(wire) == {"body", "ephemeral_public", "nonce"}
