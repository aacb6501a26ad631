// X25519 scalar multiplication (RFC 7748) — key agreement for the sealed
// box. Pure implementation so the same code runs in browsers and Node.

const P = 2n ** 255n - 19n;
const A24 = 121665n;

function mod(a: bigint): bigint {
  const r = a % P;
  return r >= 0n ? r : r + P;
}

function modInv(a: bigint): bigint {
  // Fermat: a^(p-2) mod p
  let result = 1n;
  let base = mod(a);
  let exponent = P - 2n;
  while (exponent > 0n) {
    if (exponent & 1n) result = (result * base) % P;
    base = (base * base) % P;
    exponent >>= 1n;
  }
  return result;
}

function decodeLittleEndian(bytes: Uint8Array): bigint {
  let value = 0n;
  for (let i = bytes.length - 1; i >= 0; i--) {
    value = (value << 8n) | BigInt(bytes[i]);
  }
  return value;
}

function encodeLittleEndian(value: bigint): Uint8Array {
  const out = new Uint8Array(32);
  for (let i = 0; i < 32; i++) {
    out[i] = Number(value & 0xffn);
    value >>= 8n;
  }
  return out;
}

function clampScalar(scalar: Uint8Array): bigint {
  const clamped = new Uint8Array(scalar);
  clamped[0] &= 248;
  clamped[31] &= 127;
  clamped[31] |= 64;
  return decodeLittleEndian(clamped);
}

function ladder(k: bigint, u: bigint): bigint {
  let x1 = u;
  let x2 = 1n, z2 = 0n;
  let x3 = u, z3 = 1n;
  let swap = 0n;
  for (let t = 254; t >= 0; t--) {
    const kt = (k >> BigInt(t)) & 1n;
    swap ^= kt;
    if (swap === 1n) {
      [x2, x3] = [x3, x2];
      [z2, z3] = [z3, z2];
    }
    swap = kt;
    const a = mod(x2 + z2);
    const aa = mod(a * a);
    const b = mod(x2 - z2);
    const bb = mod(b * b);
    const e = mod(aa - bb);
    const c = mod(x3 + z3);
    const d = mod(x3 - z3);
    const da = mod(d * a);
    const cb = mod(c * b);
    x3 = mod((da + cb) * (da + cb));
    z3 = mod(x1 * (da - cb) * (da - cb));
    x2 = mod(aa * bb);
    z2 = mod(e * (aa + A24 * e));
  }
  if (swap === 1n) {
    [x2, x3] = [x3, x2];
    [z2, z3] = [z3, z2];
  }
  return mod(x2 * modInv(z2));
}

export function x25519(scalar: Uint8Array, uCoordinate: Uint8Array): Uint8Array {
  if (scalar.length !== 32 || uCoordinate.length !== 32) {
    throw new Error("x25519 operands must be 32 bytes");
  }
  const masked = new Uint8Array(uCoordinate);
  masked[31] &= 127; // RFC 7748: ignore the unused top bit
  const k = clampScalar(scalar);
  const u = mod(decodeLittleEndian(masked));
  return encodeLittleEndian(ladder(k, u));
}

const BASE_POINT = encodeLittleEndian(9n);

export function x25519PublicKey(secret: Uint8Array): Uint8Array {
  return x25519(secret, BASE_POINT);
}
