// secp256k1 with public-key recovery and deterministic (RFC 6979) nonces —
// byte-compatible with the bridge server's signature scheme.

import { bigIntToBytes, bytesToBigInt, concatBytes, hexToBytes } from "./bytes.js";
import { hmacSha256 } from "./hash.js";
import { keccak256 } from "./keccak.js";

export const P = 2n ** 256n - 2n ** 32n - 977n;
export const N = BigInt("0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141");
const GX = BigInt("0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798");
const GY = BigInt("0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8");

type Jacobian = [bigint, bigint, bigint];
const INFINITY: Jacobian = [0n, 0n, 0n];

function mod(a: bigint, m: bigint): bigint {
  const r = a % m;
  return r >= 0n ? r : r + m;
}

function modPow(base: bigint, exponent: bigint, m: bigint): bigint {
  let result = 1n;
  base = mod(base, m);
  while (exponent > 0n) {
    if (exponent & 1n) result = (result * base) % m;
    base = (base * base) % m;
    exponent >>= 1n;
  }
  return result;
}

function modInv(a: bigint, m: bigint): bigint {
  // extended euclid
  let [oldR, r] = [mod(a, m), m];
  let [oldS, s] = [1n, 0n];
  while (r !== 0n) {
    const q = oldR / r;
    [oldR, r] = [r, oldR - q * r];
    [oldS, s] = [s, oldS - q * s];
  }
  if (oldR !== 1n) throw new Error("not invertible");
  return mod(oldS, m);
}

function jacDouble([x, y, z]: Jacobian): Jacobian {
  if (z === 0n || y === 0n) return INFINITY;
  const ySq = mod(y * y, P);
  const s = mod(4n * x * ySq, P);
  const m = mod(3n * x * x, P);
  const nx = mod(m * m - 2n * s, P);
  const ny = mod(m * (s - nx) - 8n * ySq * ySq, P);
  const nz = mod(2n * y * z, P);
  return [nx, ny, nz];
}

function jacAdd(p: Jacobian, q: Jacobian): Jacobian {
  if (p[2] === 0n) return q;
  if (q[2] === 0n) return p;
  const [x1, y1, z1] = p;
  const [x2, y2, z2] = q;
  const z1Sq = mod(z1 * z1, P);
  const z2Sq = mod(z2 * z2, P);
  const u1 = mod(x1 * z2Sq, P);
  const u2 = mod(x2 * z1Sq, P);
  const s1 = mod(y1 * z2 * z2Sq, P);
  const s2 = mod(y2 * z1 * z1Sq, P);
  if (u1 === u2) {
    if (s1 !== s2) return INFINITY;
    return jacDouble(p);
  }
  const h = mod(u2 - u1, P);
  const r = mod(s2 - s1, P);
  const hSq = mod(h * h, P);
  const hCu = mod(h * hSq, P);
  const v = mod(u1 * hSq, P);
  const nx = mod(r * r - hCu - 2n * v, P);
  const ny = mod(r * (v - nx) - s1 * hCu, P);
  const nz = mod(z1 * z2 * h, P);
  return [nx, ny, nz];
}

function jacMult(k: bigint, point: Jacobian): Jacobian {
  let result = INFINITY;
  let addend = point;
  k = mod(k, N);
  while (k > 0n) {
    if (k & 1n) result = jacAdd(result, addend);
    addend = jacDouble(addend);
    k >>= 1n;
  }
  return result;
}

function toAffine([x, y, z]: Jacobian): [bigint, bigint] {
  if (z === 0n) throw new Error("point at infinity");
  const zInv = modInv(z, P);
  const zInvSq = mod(zInv * zInv, P);
  return [mod(x * zInvSq, P), mod(y * zInvSq * zInv, P)];
}

export function isOnCurve(x: bigint, y: bigint): boolean {
  if (x < 0n || x >= P || y < 0n || y >= P) return false;
  return mod(y * y - x * x * x - 7n, P) === 0n;
}

export function publicFromSecret(secret: Uint8Array): Uint8Array {
  const k = bytesToBigInt(secret);
  if (k <= 0n || k >= N) throw new Error("secret scalar out of range");
  const [x, y] = toAffine(jacMult(k, [GX, GY, 1n]));
  return concatBytes(bigIntToBytes(x, 32), bigIntToBytes(y, 32));
}

export function deriveAddress(publicKey: Uint8Array): string {
  if (publicKey.length !== 64) throw new Error("uncompressed public key must be 64 bytes");
  const x = bytesToBigInt(publicKey.slice(0, 32));
  const y = bytesToBigInt(publicKey.slice(32));
  if (!isOnCurve(x, y)) throw new Error("public key is not a curve point");
  const digest = keccak256(publicKey);
  let hex = "";
  for (const b of digest.slice(12)) hex += b.toString(16).padStart(2, "0");
  return "0x" + hex;
}

export function hashMessage(message: Uint8Array): Uint8Array {
  return keccak256(message);
}

export interface Signature {
  r: bigint;
  s: bigint;
  recoveryId: number;
}

export function signatureToHex(sig: Signature): string {
  const bytes = concatBytes(
    bigIntToBytes(sig.r, 32),
    bigIntToBytes(sig.s, 32),
    Uint8Array.of(sig.recoveryId),
  );
  let hex = "";
  for (const b of bytes) hex += b.toString(16).padStart(2, "0");
  return hex;
}

export function signatureFromHex(hex: string): Signature {
  const raw = hexToBytes(hex);
  if (raw.length !== 65) throw new Error("compact signature must be 65 bytes");
  return {
    r: bytesToBigInt(raw.slice(0, 32)),
    s: bytesToBigInt(raw.slice(32, 64)),
    recoveryId: raw[64],
  };
}

async function rfc6979Nonce(secret: bigint, digest: Uint8Array): Promise<bigint> {
  const x = bigIntToBytes(secret, 32);
  const h = bigIntToBytes(mod(bytesToBigInt(digest), N), 32);
  let v: Uint8Array = new Uint8Array(32).fill(0x01);
  let k: Uint8Array = new Uint8Array(32).fill(0x00);
  k = await hmacSha256(k, concatBytes(v, Uint8Array.of(0x00), x, h));
  v = await hmacSha256(k, v);
  k = await hmacSha256(k, concatBytes(v, Uint8Array.of(0x01), x, h));
  v = await hmacSha256(k, v);
  for (;;) {
    v = await hmacSha256(k, v);
    const candidate = bytesToBigInt(v);
    if (candidate > 0n && candidate < N) return candidate;
    k = await hmacSha256(k, concatBytes(v, Uint8Array.of(0x00)));
    v = await hmacSha256(k, v);
  }
}

export async function signMessage(secret: Uint8Array, message: Uint8Array): Promise<Signature> {
  if (message.length === 0) throw new Error("refusing to sign an empty message");
  const digest = hashMessage(message);
  const d = bytesToBigInt(secret);
  if (d <= 0n || d >= N) throw new Error("secret scalar out of range");
  const z = mod(bytesToBigInt(digest), N);
  const k = await rfc6979Nonce(d, digest);
  const [rx, ry] = toAffine(jacMult(k, [GX, GY, 1n]));
  const r = mod(rx, N);
  if (r === 0n) throw new Error("degenerate nonce");
  let s = mod(modInv(k, N) * (z + r * d), N);
  if (s === 0n) throw new Error("degenerate signature");
  let recoveryId = Number(ry & 1n) | (rx >= N ? 2 : 0);
  if (s > N / 2n) {
    s = N - s;
    recoveryId ^= 1;
  }
  return { r, s, recoveryId };
}

export function recoverPublicKey(message: Uint8Array, sig: Signature): Uint8Array {
  const { r, s, recoveryId } = sig;
  if (r <= 0n || r >= N || s <= 0n || s >= N || recoveryId < 0 || recoveryId > 3) {
    throw new Error("signature components out of range");
  }
  const x = recoveryId >= 2 ? r + N : r;
  if (x >= P) throw new Error("recovery x exceeds field");
  const ySq = mod(modPow(x, 3n, P) + 7n, P);
  let y = modPow(ySq, (P + 1n) / 4n, P);
  if (mod(y * y, P) !== ySq) throw new Error("recovery x is not on the curve");
  if ((y & 1n) !== BigInt(recoveryId & 1)) y = P - y;
  const z = mod(bytesToBigInt(hashMessage(message)), N);
  const rInv = modInv(r, N);
  const u1 = mod(-z * rInv, N);
  const u2 = mod(s * rInv, N);
  const point = jacAdd(jacMult(u1, [GX, GY, 1n]), jacMult(u2, [x, y, 1n]));
  const [qx, qy] = toAffine(point);
  return concatBytes(bigIntToBytes(qx, 32), bigIntToBytes(qy, 32));
}
