// ChaCha20-Poly1305 AEAD (RFC 8439). WebCrypto has no ChaCha suite, so the
// cipher is implemented here; it must interoperate bit-for-bit with the
// server-side library.

import { bytesEqual, concatBytes } from "./bytes.js";

function rotl32(v: number, c: number): number {
  return ((v << c) | (v >>> (32 - c))) >>> 0;
}

function chachaBlock(key: Uint32Array, counter: number, nonce: Uint32Array): Uint32Array {
  const state = new Uint32Array(16);
  state[0] = 0x61707865;
  state[1] = 0x3320646e;
  state[2] = 0x79622d32;
  state[3] = 0x6b206574;
  state.set(key, 4);
  state[12] = counter >>> 0;
  state.set(nonce, 13);

  const working = new Uint32Array(state);
  const quarter = (a: number, b: number, c: number, d: number) => {
    working[a] = (working[a] + working[b]) >>> 0; working[d] = rotl32(working[d] ^ working[a], 16);
    working[c] = (working[c] + working[d]) >>> 0; working[b] = rotl32(working[b] ^ working[c], 12);
    working[a] = (working[a] + working[b]) >>> 0; working[d] = rotl32(working[d] ^ working[a], 8);
    working[c] = (working[c] + working[d]) >>> 0; working[b] = rotl32(working[b] ^ working[c], 7);
  };
  for (let i = 0; i < 10; i++) {
    quarter(0, 4, 8, 12); quarter(1, 5, 9, 13); quarter(2, 6, 10, 14); quarter(3, 7, 11, 15);
    quarter(0, 5, 10, 15); quarter(1, 6, 11, 12); quarter(2, 7, 8, 13); quarter(3, 4, 9, 14);
  }
  for (let i = 0; i < 16; i++) working[i] = (working[i] + state[i]) >>> 0;
  return working;
}

function wordsToBytes(words: Uint32Array): Uint8Array {
  const out = new Uint8Array(words.length * 4);
  for (let i = 0; i < words.length; i++) {
    out[4 * i] = words[i] & 0xff;
    out[4 * i + 1] = (words[i] >>> 8) & 0xff;
    out[4 * i + 2] = (words[i] >>> 16) & 0xff;
    out[4 * i + 3] = (words[i] >>> 24) & 0xff;
  }
  return out;
}

function bytesToWords(bytes: Uint8Array): Uint32Array {
  const out = new Uint32Array(bytes.length / 4);
  for (let i = 0; i < out.length; i++) {
    out[i] = (bytes[4 * i] | (bytes[4 * i + 1] << 8) | (bytes[4 * i + 2] << 16) | (bytes[4 * i + 3] << 24)) >>> 0;
  }
  return out;
}

function chacha20Xor(key: Uint8Array, nonce: Uint8Array, data: Uint8Array, initialCounter: number): Uint8Array {
  const keyWords = bytesToWords(key);
  const nonceWords = bytesToWords(nonce);
  const out = new Uint8Array(data.length);
  for (let offset = 0; offset < data.length; offset += 64) {
    const block = wordsToBytes(chachaBlock(keyWords, initialCounter + offset / 64, nonceWords));
    const chunk = Math.min(64, data.length - offset);
    for (let i = 0; i < chunk; i++) out[offset + i] = data[offset + i] ^ block[i];
  }
  return out;
}

const POLY_P = (1n << 130n) - 5n;

function poly1305(key: Uint8Array, message: Uint8Array): Uint8Array {
  const rBytes = new Uint8Array(key.slice(0, 16));
  rBytes[3] &= 15; rBytes[7] &= 15; rBytes[11] &= 15; rBytes[15] &= 15;
  rBytes[4] &= 252; rBytes[8] &= 252; rBytes[12] &= 252;
  let r = 0n, sPad = 0n;
  for (let i = 15; i >= 0; i--) r = (r << 8n) | BigInt(rBytes[i]);
  for (let i = 31; i >= 16; i--) sPad = (sPad << 8n) | BigInt(key[i]);

  let accumulator = 0n;
  for (let offset = 0; offset < message.length; offset += 16) {
    const chunk = message.slice(offset, offset + 16);
    let block = 0n;
    for (let i = chunk.length - 1; i >= 0; i--) block = (block << 8n) | BigInt(chunk[i]);
    block |= 1n << BigInt(8 * chunk.length);
    accumulator = ((accumulator + block) * r) % POLY_P;
  }
  accumulator = (accumulator + sPad) & ((1n << 128n) - 1n);
  const tag = new Uint8Array(16);
  for (let i = 0; i < 16; i++) {
    tag[i] = Number(accumulator & 0xffn);
    accumulator >>= 8n;
  }
  return tag;
}

function lengthsBlock(aadLength: number, ciphertextLength: number): Uint8Array {
  const out = new Uint8Array(16);
  new DataView(out.buffer).setBigUint64(0, BigInt(aadLength), true);
  new DataView(out.buffer).setBigUint64(8, BigInt(ciphertextLength), true);
  return out;
}

function pad16(data: Uint8Array): Uint8Array {
  const remainder = data.length % 16;
  return remainder === 0 ? data : concatBytes(data, new Uint8Array(16 - remainder));
}

function computeTag(key: Uint8Array, nonce: Uint8Array, aad: Uint8Array, ciphertext: Uint8Array): Uint8Array {
  const otk = wordsToBytes(chachaBlock(bytesToWords(key), 0, bytesToWords(nonce))).slice(0, 32);
  const macData = concatBytes(pad16(aad), pad16(ciphertext), lengthsBlock(aad.length, ciphertext.length));
  return poly1305(otk, macData);
}

export function chacha20poly1305Seal(
  key: Uint8Array, nonce: Uint8Array, plaintext: Uint8Array, aad: Uint8Array = new Uint8Array(0),
): Uint8Array {
  if (key.length !== 32 || nonce.length !== 12) throw new Error("key must be 32 bytes, nonce 12");
  const ciphertext = chacha20Xor(key, nonce, plaintext, 1);
  return concatBytes(ciphertext, computeTag(key, nonce, aad, ciphertext));
}

export class AeadAuthenticationError extends Error {}

export function chacha20poly1305Open(
  key: Uint8Array, nonce: Uint8Array, sealed: Uint8Array, aad: Uint8Array = new Uint8Array(0),
): Uint8Array {
  if (key.length !== 32 || nonce.length !== 12) throw new Error("key must be 32 bytes, nonce 12");
  if (sealed.length < 16) throw new AeadAuthenticationError("sealed input shorter than the tag");
  const ciphertext = sealed.slice(0, sealed.length - 16);
  const tag = sealed.slice(sealed.length - 16);
  const expected = computeTag(key, nonce, aad, ciphertext);
  if (!bytesEqual(tag, expected)) {
    throw new AeadAuthenticationError("authentication failed: wrong key or tampered ciphertext");
  }
  return chacha20Xor(key, nonce, ciphertext, 1);
}
