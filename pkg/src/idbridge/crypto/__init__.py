"""Cryptographic primitives: recoverable signatures, sealed-box
encryption, SHA-512 commitments, salted blinding, predicates, randomness."""

from .hashing import blind, sha512, verify_blinded
from .keccak import keccak256
from .predicates import Predicate, evaluate_predicate
from .rng import Randomness, SeededRandomness, SYSTEM_RANDOMNESS, new_challenge_nonce, new_redirect_token, new_salt
from .sealedbox import Ciphertext, decrypt, encrypt, encryption_public_from_secret, generate_encryption_secret
from .signing import (
    RecoverableSignature,
    derive_address,
    generate_signing_secret,
    hash_message,
    public_from_secret,
    recover,
    sign,
    verify,
)

__all__ = [
    "Ciphertext",
    "Predicate",
    "Randomness",
    "RecoverableSignature",
    "SYSTEM_RANDOMNESS",
    "SeededRandomness",
    "blind",
    "decrypt",
    "derive_address",
    "encrypt",
    "encryption_public_from_secret",
    "evaluate_predicate",
    "generate_encryption_secret",
    "generate_signing_secret",
    "hash_message",
    "keccak256",
    "new_challenge_nonce",
    "new_redirect_token",
    "new_salt",
    "public_from_secret",
    "recover",
    "sign",
    "verify",
]
