"""Authenticated asymmetric encryption to a holder's encryption key.

Sealed-box construction: a fresh X25519 ephemeral key agrees a shared
secret with the recipient key; HKDF-SHA256 (salt = the 24-byte random
nonce, info = domain tag ‖ ephemeral ‖ recipient public keys) derives a
single-use ChaCha20-Poly1305 key, used with an all-zero AEAD nonce. Every
Ciphertext field is therefore bound: flipping any bit of the ephemeral
key, nonce, or body makes decryption fail.
"""
from __future__ import annotations

from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from ..errors import DecryptionError
from .rng import Randomness, SYSTEM_RANDOMNESS

NONCE_LENGTH = 24
_HKDF_INFO_TAG = b"idbridge/sealed-box/v1"
_ZERO_AEAD_NONCE = b"\x00" * 12


@dataclass(frozen=True)
class Ciphertext:
    ephemeral_public: bytes  # 32 bytes
    nonce: bytes  # 24 bytes
    body: bytes  # AEAD ciphertext ‖ tag

    def __post_init__(self):
        if len(self.ephemeral_public) != 32:
            raise ValueError("ephemeral_public must be 32 bytes")
        if len(self.nonce) != NONCE_LENGTH:
            raise ValueError(f"nonce must be {NONCE_LENGTH} bytes")
        if len(self.body) < 16:
            raise ValueError("body shorter than the authentication tag")


def generate_encryption_secret(rng: Randomness = SYSTEM_RANDOMNESS) -> bytes:
    return rng.random_bytes(32)


def encryption_public_from_secret(secret: bytes) -> bytes:
    if len(secret) != 32:
        raise ValueError("encryption secret must be 32 bytes")
    key = X25519PrivateKey.from_private_bytes(secret)
    return key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)


def _derive_key(shared: bytes, nonce: bytes, ephemeral_public: bytes, recipient_public: bytes) -> bytes:
    return HKDF(
        algorithm=hashes.SHA256(),
        length=32,
        salt=nonce,
        info=_HKDF_INFO_TAG + ephemeral_public + recipient_public,
    ).derive(shared)


def encrypt(recipient_public: bytes, plaintext: bytes, rng: Randomness = SYSTEM_RANDOMNESS) -> Ciphertext:
    """Encrypt so that only the holder of the matching secret can read."""
    if len(recipient_public) != 32:
        raise ValueError("recipient public key must be 32 bytes")
    recipient = X25519PublicKey.from_public_bytes(recipient_public)
    ephemeral = X25519PrivateKey.from_private_bytes(rng.random_bytes(32))
    ephemeral_public = ephemeral.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    nonce = rng.random_bytes(NONCE_LENGTH)
    key = _derive_key(ephemeral.exchange(recipient), nonce, ephemeral_public, recipient_public)
    body = ChaCha20Poly1305(key).encrypt(_ZERO_AEAD_NONCE, plaintext, None)
    return Ciphertext(ephemeral_public=ephemeral_public, nonce=nonce, body=body)


def decrypt(recipient_secret: bytes, ciphertext: Ciphertext) -> bytes:
    """Inverse of :func:`encrypt`; raises DecryptionError on any tampering
    or key mismatch, never returns garbage plaintext."""
    if len(recipient_secret) != 32:
        raise DecryptionError("encryption secret must be 32 bytes")
    secret = X25519PrivateKey.from_private_bytes(recipient_secret)
    recipient_public = secret.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    try:
        ephemeral = X25519PublicKey.from_public_bytes(ciphertext.ephemeral_public)
        key = _derive_key(
            secret.exchange(ephemeral),
            ciphertext.nonce,
            ciphertext.ephemeral_public,
            recipient_public,
        )
        return ChaCha20Poly1305(key).decrypt(_ZERO_AEAD_NONCE, ciphertext.body, None)
    except InvalidTag as exc:
        raise DecryptionError("authentication failed: wrong key or tampered ciphertext") from exc
    except ValueError as exc:
        raise DecryptionError(f"undecryptable ciphertext: {exc}") from exc
