"""SHA-512 commitments and salted blinding of attribute values."""
from __future__ import annotations

import hashlib
import hmac as _hmac

from ..canonical import canonicalize
from .rng import SALT_LENGTH

Scalar = str | int | float | bool


def sha512(data: bytes) -> bytes:
    return hashlib.sha512(data).digest()


def blind(value: Scalar, salt: bytes) -> bytes:
    """Salted commitment: SHA-512(salt ‖ canonical(value)).

    Verifiable by anyone who later learns (salt, value); unlinkable across
    presentations because each uses a fresh salt.
    """
    if len(salt) != SALT_LENGTH:
        raise ValueError(f"salt must be exactly {SALT_LENGTH} bytes")
    return sha512(salt + canonicalize(value))


def verify_blinded(digest: bytes, salt: bytes, value: Scalar) -> bool:
    if len(salt) != SALT_LENGTH:
        raise ValueError(f"salt must be exactly {SALT_LENGTH} bytes")
    return _hmac.compare_digest(digest, blind(value, salt))
