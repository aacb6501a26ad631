// Sealed-box encryption to the holder's key: X25519 ephemeral agreement,
// HKDF-SHA256 (salt = 24-byte random nonce, info = domain tag + both
// public keys), ChaCha20-Poly1305 under an all-zero AEAD nonce. Matches
// the server-side construction bit-for-bit.

import { concatBytes, utf8Encode } from "./bytes.js";
import { AeadAuthenticationError, chacha20poly1305Open, chacha20poly1305Seal } from "./chacha20poly1305.js";
import { hkdfSha256 } from "./hash.js";
import { Rng, systemRng } from "./rng.js";
import { x25519, x25519PublicKey } from "./x25519.js";

const HKDF_INFO_TAG = utf8Encode("idbridge/sealed-box/v1");
const ZERO_AEAD_NONCE = new Uint8Array(12);
export const NONCE_LENGTH = 24;

export interface Ciphertext {
  ephemeralPublic: Uint8Array; // 32 bytes
  nonce: Uint8Array; // 24 bytes
  body: Uint8Array; // AEAD ciphertext + tag
}

export class DecryptionError extends Error {}

export function encryptionPublicFromSecret(secret: Uint8Array): Uint8Array {
  if (secret.length !== 32) throw new Error("encryption secret must be 32 bytes");
  return x25519PublicKey(secret);
}

async function deriveKey(
  shared: Uint8Array, nonce: Uint8Array, ephemeralPublic: Uint8Array, recipientPublic: Uint8Array,
): Promise<Uint8Array> {
  return hkdfSha256(shared, nonce, concatBytes(HKDF_INFO_TAG, ephemeralPublic, recipientPublic), 32);
}

export async function encrypt(
  recipientPublic: Uint8Array, plaintext: Uint8Array, rng: Rng = systemRng,
): Promise<Ciphertext> {
  if (recipientPublic.length !== 32) throw new Error("recipient public key must be 32 bytes");
  const ephemeralSecret = rng.randomBytes(32);
  const ephemeralPublic = x25519PublicKey(ephemeralSecret);
  const nonce = rng.randomBytes(NONCE_LENGTH);
  const shared = x25519(ephemeralSecret, recipientPublic);
  const key = await deriveKey(shared, nonce, ephemeralPublic, recipientPublic);
  const body = chacha20poly1305Seal(key, ZERO_AEAD_NONCE, plaintext);
  return { ephemeralPublic, nonce, body };
}

export async function decrypt(recipientSecret: Uint8Array, ciphertext: Ciphertext): Promise<Uint8Array> {
  if (recipientSecret.length !== 32) throw new DecryptionError("encryption secret must be 32 bytes");
  const recipientPublic = x25519PublicKey(recipientSecret);
  try {
    const shared = x25519(recipientSecret, ciphertext.ephemeralPublic);
    const key = await deriveKey(shared, ciphertext.nonce, ciphertext.ephemeralPublic, recipientPublic);
    return chacha20poly1305Open(key, ZERO_AEAD_NONCE, ciphertext.body);
  } catch (error) {
    if (error instanceof AeadAuthenticationError) {
      throw new DecryptionError(error.message);
    }
    throw new DecryptionError(`undecryptable ciphertext: ${String(error)}`);
  }
}
