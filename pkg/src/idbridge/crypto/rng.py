"""Randomness sources: system CSPRNG plus a seedable stream for tests."""
from __future__ import annotations

import hashlib
import secrets


class Randomness:
    """System randomness (default everywhere)."""

    def random_bytes(self, n: int) -> bytes:
        if n < 1:
            raise ValueError("n must be positive")
        return secrets.token_bytes(n)


class SeededRandomness(Randomness):
    """Deterministic byte stream for reproducible tests.

    SHA-512 counter stream — not for production use; the stream is fully
    determined by the seed. One owner at a time (stateful counter).
    """

    def __init__(self, seed: bytes | str):
        if isinstance(seed, str):
            seed = seed.encode("utf-8")
        self._seed = seed
        self._counter = 0
        self._buffer = b""

    def random_bytes(self, n: int) -> bytes:
        if n < 1:
            raise ValueError("n must be positive")
        while len(self._buffer) < n:
            block = hashlib.sha512(self._seed + self._counter.to_bytes(8, "big")).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out


SYSTEM_RANDOMNESS = Randomness()

SALT_LENGTH = 32
TOKEN_LENGTH = 16
NONCE_LENGTH = 32


def new_salt(rng: Randomness = SYSTEM_RANDOMNESS) -> bytes:
    return rng.random_bytes(SALT_LENGTH)


def new_redirect_token(rng: Randomness = SYSTEM_RANDOMNESS) -> str:
    return rng.random_bytes(TOKEN_LENGTH).hex()


def new_challenge_nonce(rng: Randomness = SYSTEM_RANDOMNESS) -> str:
    return rng.random_bytes(NONCE_LENGTH).hex()
