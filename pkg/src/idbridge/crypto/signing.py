"""Recoverable wallet signatures over arbitrary-length messages.

Messages are hashed to a scalar with Keccak-256 (the address scheme's
native digest), then signed with deterministic secp256k1 ECDSA. The signer
is recoverable from (message, signature) alone.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import secp256k1
from .keccak import keccak256
from .rng import Randomness, SYSTEM_RANDOMNESS


@dataclass(frozen=True)
class RecoverableSignature:
    r: bytes  # 32 bytes
    s: bytes  # 32 bytes
    recovery_id: int  # 0-3

    def __post_init__(self):
        if len(self.r) != 32 or len(self.s) != 32:
            raise secp256k1.InvalidSignature("r and s must be 32 bytes each")
        if not 0 <= self.recovery_id <= 3:
            raise secp256k1.InvalidSignature("recovery_id out of range")

    def to_bytes(self) -> bytes:
        return self.r + self.s + bytes([self.recovery_id])

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "RecoverableSignature":
        if len(raw) != 65:
            raise secp256k1.InvalidSignature("compact signature must be 65 bytes")
        return cls(r=raw[:32], s=raw[32:64], recovery_id=raw[64])

    @classmethod
    def from_hex(cls, text: str) -> "RecoverableSignature":
        try:
            raw = bytes.fromhex(text)
        except ValueError as exc:
            raise secp256k1.InvalidSignature("signature is not valid hex") from exc
        return cls.from_bytes(raw)


def hash_message(message: bytes) -> bytes:
    return keccak256(message)


def generate_signing_secret(rng: Randomness = SYSTEM_RANDOMNESS) -> bytes:
    """Uniform scalar in [1, n), 32 bytes big-endian."""
    while True:
        candidate = rng.random_bytes(32)
        value = int.from_bytes(candidate, "big")
        if 0 < value < secp256k1.N:
            return candidate


def public_from_secret(secret: bytes) -> bytes:
    """64-byte uncompressed public key (x ‖ y) for a 32-byte secret."""
    if len(secret) != 32:
        raise secp256k1.InvalidKey("signing secret must be 32 bytes")
    x, y = secp256k1.public_point(int.from_bytes(secret, "big"))
    return x.to_bytes(32, "big") + y.to_bytes(32, "big")


def sign(secret: bytes, message: bytes) -> RecoverableSignature:
    """Deterministically sign ``message``; same inputs, same signature."""
    if not message:
        raise ValueError("refusing to sign an empty message")
    if len(secret) != 32:
        raise secp256k1.InvalidKey("signing secret must be 32 bytes")
    r, s, recovery_id = secp256k1.sign_digest(
        int.from_bytes(secret, "big"), hash_message(message)
    )
    return RecoverableSignature(
        r=r.to_bytes(32, "big"), s=s.to_bytes(32, "big"), recovery_id=recovery_id
    )


def recover(message: bytes, signature: RecoverableSignature) -> bytes:
    """Recover the 64-byte public key that produced ``signature``."""
    x, y = secp256k1.recover_digest(
        hash_message(message),
        int.from_bytes(signature.r, "big"),
        int.from_bytes(signature.s, "big"),
        signature.recovery_id,
    )
    return x.to_bytes(32, "big") + y.to_bytes(32, "big")


def verify(public: bytes, message: bytes, signature: RecoverableSignature) -> bool:
    if len(public) != 64:
        return False
    point = (int.from_bytes(public[:32], "big"), int.from_bytes(public[32:], "big"))
    return secp256k1.verify_digest(
        point,
        hash_message(message),
        int.from_bytes(signature.r, "big"),
        int.from_bytes(signature.s, "big"),
    )


def derive_address(signing_public: bytes) -> str:
    """EVM-style address: last 20 bytes of Keccak-256 over the 64-byte key."""
    if len(signing_public) != 64:
        raise secp256k1.InvalidKey("uncompressed public key must be 64 bytes")
    point = (int.from_bytes(signing_public[:32], "big"), int.from_bytes(signing_public[32:], "big"))
    if not secp256k1.is_on_curve(*point):
        raise secp256k1.InvalidKey("public key is not a curve point")
    return "0x" + keccak256(signing_public)[-20:].hex()
