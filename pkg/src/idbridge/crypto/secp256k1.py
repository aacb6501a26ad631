"""secp256k1 group arithmetic, deterministic ECDSA, and public-key recovery.

Implemented directly because signature *recovery* (needed so verifiers can
identify the wallet from a signed message alone) is not exposed by the
available library stack. Nonces follow RFC 6979 (HMAC-SHA256), so signing
is deterministic; ``s`` is normalised to the low half of the order.
"""
from __future__ import annotations

import hashlib
import hmac

P = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

_INFINITY = (0, 0, 0)  # Jacobian point at infinity (Z == 0)


class InvalidKey(ValueError):
    """Scalar out of range or point not on the curve."""


class InvalidSignature(ValueError):
    """Signature components out of range or recovery impossible."""


# -- point arithmetic (Jacobian coordinates, a = 0) -------------------------

def _jac_double(point):
    x, y, z = point
    if z == 0 or y == 0:
        return _INFINITY
    ysq = (y * y) % P
    s = (4 * x * ysq) % P
    m = (3 * x * x) % P
    nx = (m * m - 2 * s) % P
    ny = (m * (s - nx) - 8 * ysq * ysq) % P
    nz = (2 * y * z) % P
    return nx, ny, nz


def _jac_add(p, q):
    if p[2] == 0:
        return q
    if q[2] == 0:
        return p
    x1, y1, z1 = p
    x2, y2, z2 = q
    z1sq = (z1 * z1) % P
    z2sq = (z2 * z2) % P
    u1 = (x1 * z2sq) % P
    u2 = (x2 * z1sq) % P
    s1 = (y1 * z2 * z2sq) % P
    s2 = (y2 * z1 * z1sq) % P
    if u1 == u2:
        if s1 != s2:
            return _INFINITY
        return _jac_double(p)
    h = (u2 - u1) % P
    r = (s2 - s1) % P
    hsq = (h * h) % P
    hcu = (h * hsq) % P
    v = (u1 * hsq) % P
    nx = (r * r - hcu - 2 * v) % P
    ny = (r * (v - nx) - s1 * hcu) % P
    nz = (z1 * z2 * h) % P
    return nx, ny, nz


def _jac_mult(k: int, point):
    result = _INFINITY
    addend = point
    while k:
        if k & 1:
            result = _jac_add(result, addend)
        addend = _jac_double(addend)
        k >>= 1
    return result


def _to_affine(point) -> tuple[int, int]:
    x, y, z = point
    if z == 0:
        raise InvalidSignature("point at infinity")
    z_inv = pow(z, -1, P)
    z_inv_sq = (z_inv * z_inv) % P
    return (x * z_inv_sq) % P, (y * z_inv_sq * z_inv) % P


def _mult(k: int, x: int, y: int) -> tuple[int, int]:
    return _to_affine(_jac_mult(k % N, (x, y, 1)))


def is_on_curve(x: int, y: int) -> bool:
    if not (0 <= x < P and 0 <= y < P):
        return False
    return (y * y - x * x * x - 7) % P == 0


def public_point(secret: int) -> tuple[int, int]:
    """Affine public point of a secret scalar."""
    if not 0 < secret < N:
        raise InvalidKey("secret scalar out of range")
    return _mult(secret, GX, GY)


def _lift_x(x: int, odd_y: bool) -> tuple[int, int]:
    if not 0 <= x < P:
        raise InvalidSignature("recovery x out of field")
    y_sq = (pow(x, 3, P) + 7) % P
    y = pow(y_sq, (P + 1) // 4, P)  # P ≡ 3 (mod 4)
    if (y * y) % P != y_sq:
        raise InvalidSignature("recovery x is not on the curve")
    if bool(y & 1) != odd_y:
        y = P - y
    return x, y


# -- RFC 6979 deterministic nonce -------------------------------------------

def _rfc6979_nonce(secret: int, digest32: bytes, retry: int = 0) -> int:
    # qlen == hlen == 256 bits, so bits2int is the plain big-endian int.
    x = secret.to_bytes(32, "big")
    h = (int.from_bytes(digest32, "big") % N).to_bytes(32, "big")
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + x + h, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + x + h, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    skipped = 0
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        candidate = int.from_bytes(v, "big")
        if 0 < candidate < N:
            if skipped >= retry:
                return candidate
            skipped += 1
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


# -- sign / verify / recover over a 32-byte digest ---------------------------

def sign_digest(secret: int, digest32: bytes) -> tuple[int, int, int]:
    """Sign a 32-byte digest; returns (r, s, recovery_id) with low-s."""
    if not 0 < secret < N:
        raise InvalidKey("secret scalar out of range")
    if len(digest32) != 32:
        raise InvalidSignature("digest must be 32 bytes")
    z = int.from_bytes(digest32, "big") % N
    retry = 0
    while True:
        k = _rfc6979_nonce(secret, digest32, retry)
        rx, ry = _mult(k, GX, GY)
        r = rx % N
        if r == 0:
            retry += 1
            continue
        s = (pow(k, -1, N) * (z + r * secret)) % N
        if s == 0:
            retry += 1
            continue
        recovery_id = (ry & 1) | (2 if rx >= N else 0)
        if s > N // 2:
            s = N - s
            recovery_id ^= 1
        return r, s, recovery_id


def recover_digest(digest32: bytes, r: int, s: int, recovery_id: int) -> tuple[int, int]:
    """Recover the affine public point that signed ``digest32``."""
    if not (0 < r < N and 0 < s < N):
        raise InvalidSignature("r/s out of range")
    if not 0 <= recovery_id <= 3:
        raise InvalidSignature("recovery_id out of range")
    if len(digest32) != 32:
        raise InvalidSignature("digest must be 32 bytes")
    x = r + N if recovery_id >= 2 else r
    if x >= P:
        raise InvalidSignature("recovery x exceeds field")
    big_r = _lift_x(x, odd_y=bool(recovery_id & 1))
    z = int.from_bytes(digest32, "big") % N
    r_inv = pow(r, -1, N)
    u1 = (-z * r_inv) % N
    u2 = (s * r_inv) % N
    point = _jac_add(_jac_mult(u1, (GX, GY, 1)), _jac_mult(u2, (*big_r, 1)))
    return _to_affine(point)


def verify_digest(public: tuple[int, int], digest32: bytes, r: int, s: int) -> bool:
    if not (0 < r < N and 0 < s < N):
        return False
    if not is_on_curve(*public):
        return False
    z = int.from_bytes(digest32, "big") % N
    s_inv = pow(s, -1, N)
    u1 = (z * s_inv) % N
    u2 = (r * s_inv) % N
    point = _jac_add(_jac_mult(u1, (GX, GY, 1)), _jac_mult(u2, (*public, 1)))
    if point[2] == 0:
        return False
    x, _ = _to_affine(point)
    return x % N == r
