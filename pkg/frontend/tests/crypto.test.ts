import { describe, expect, it } from "vitest";

import { bytesToHex, hexToBytes, utf8Encode } from "../src/bytes.js";
import { chacha20poly1305Open, chacha20poly1305Seal, AeadAuthenticationError } from "../src/chacha20poly1305.js";
import { sha512 } from "../src/hash.js";
import { keccak256 } from "../src/keccak.js";
import {
  deriveAddress,
  publicFromSecret,
  recoverPublicKey,
  signatureFromHex,
  signatureToHex,
  signMessage,
} from "../src/secp256k1.js";
import { decrypt, encrypt, encryptionPublicFromSecret, DecryptionError } from "../src/sealedbox.js";
import { x25519, x25519PublicKey } from "../src/x25519.js";
import { SeededRng } from "./seeded-rng.js";
import vectors from "./interop-vectors.json";

describe("keccak-256", () => {
  it("matches the published vectors", () => {
    for (const vector of vectors.keccak256) {
      expect(bytesToHex(keccak256(utf8Encode(vector.data)))).toBe(vector.hex);
    }
  });
});

describe("sha-512", () => {
  it("matches the FIPS vectors", async () => {
    for (const vector of vectors.sha512) {
      expect(bytesToHex(await sha512(utf8Encode(vector.data)))).toBe(vector.hex);
    }
  });
});

describe("seeded rng port", () => {
  it("reproduces the server-side stream exactly", () => {
    const rng = new SeededRng(vectors.seeded_rng.seed);
    const draws = [7, 32, 24, 3].map((n) => bytesToHex(rng.randomBytes(n)));
    expect(draws).toEqual(vectors.seeded_rng.draws);
  });
});

describe("recoverable signing", () => {
  it("derives the same public key and address as the server", () => {
    const secret = hexToBytes(vectors.signing.secret);
    expect(bytesToHex(publicFromSecret(secret))).toBe(vectors.signing.public);
    expect(deriveAddress(publicFromSecret(secret))).toBe(vectors.signing.address);
  });

  it("produces the byte-identical deterministic signature", async () => {
    const signature = await signMessage(
      hexToBytes(vectors.signing.secret), utf8Encode(vectors.signing.message),
    );
    expect(signatureToHex(signature)).toBe(vectors.signing.signature);
  });

  it("recovers the signing key from a signature", async () => {
    const secret = hexToBytes(vectors.signing.secret);
    const message = utf8Encode("recover me");
    const signature = await signMessage(secret, message);
    expect(bytesToHex(recoverPublicKey(message, signature))).toBe(vectors.signing.public);
    // the server-produced signature also recovers
    const serverSig = signatureFromHex(vectors.signing.signature);
    expect(bytesToHex(recoverPublicKey(utf8Encode(vectors.signing.message), serverSig))).toBe(
      vectors.signing.public,
    );
  });

  it("recovery fails or diverges on a tampered message", async () => {
    const secret = hexToBytes(vectors.signing.secret);
    const signature = await signMessage(secret, utf8Encode("original"));
    try {
      const recovered = recoverPublicKey(utf8Encode("originaX"), signature);
      expect(bytesToHex(recovered)).not.toBe(vectors.signing.public);
    } catch {
      // outright failure is detection too
    }
  });
});

describe("x25519", () => {
  it("matches the RFC 7748 Diffie-Hellman vector", () => {
    const aliceSecret = hexToBytes("77076d0a7318a57d3c16c17251b26645df4c2f87ebc0992ab177fba51db92c2a");
    const bobSecret = hexToBytes("5dab087e624a8a4b79e17f8b83800ee66f3bb1292618b6fd1c2f8b27ff88e0eb");
    const alicePublic = x25519PublicKey(aliceSecret);
    const bobPublic = x25519PublicKey(bobSecret);
    expect(bytesToHex(alicePublic)).toBe(
      "8520f0098930a754748b7ddcb43ef75a0dbf3a0d26381af4eba4a98eaa9b4e6a",
    );
    expect(bytesToHex(bobPublic)).toBe(
      "de9edb7d7b7dc1b4d35b61c2ece435373f8343c85b78674dadfc7e146f882b4f",
    );
    const shared = "4a5d9d5ba4ce2de1728e3bf480350f25e07e21c947d19e3376f09b3c1e161742";
    expect(bytesToHex(x25519(aliceSecret, bobPublic))).toBe(shared);
    expect(bytesToHex(x25519(bobSecret, alicePublic))).toBe(shared);
  });
});

describe("chacha20-poly1305", () => {
  it("seals and opens, and fails loudly on tampering", () => {
    const key = new Uint8Array(32).fill(7);
    const nonce = new Uint8Array(12);
    const plaintext = utf8Encode("integrity protected");
    const sealed = chacha20poly1305Seal(key, nonce, plaintext);
    expect(chacha20poly1305Open(key, nonce, sealed)).toEqual(plaintext);
    const tampered = new Uint8Array(sealed);
    tampered[3] ^= 0x01;
    expect(() => chacha20poly1305Open(key, nonce, tampered)).toThrow(AeadAuthenticationError);
  });
});

describe("sealed box", () => {
  it("reproduces the server-side ciphertext bit-for-bit under the same seed", async () => {
    const v = vectors.sealedbox;
    const ciphertext = await encrypt(
      hexToBytes(v.recipient_public), utf8Encode(v.plaintext), new SeededRng(v.rng_seed),
    );
    expect(bytesToHex(ciphertext.ephemeralPublic)).toBe(v.ephemeral_public);
    expect(bytesToHex(ciphertext.nonce)).toBe(v.nonce);
    expect(bytesToHex(ciphertext.body)).toBe(v.body);
  });

  it("decrypts the server-produced ciphertext", async () => {
    const v = vectors.sealedbox;
    const plaintext = await decrypt(hexToBytes(v.recipient_secret), {
      ephemeralPublic: hexToBytes(v.ephemeral_public),
      nonce: hexToBytes(v.nonce),
      body: hexToBytes(v.body),
    });
    expect(new TextDecoder().decode(plaintext)).toBe(v.plaintext);
  });

  it("derives the matching public key", () => {
    const v = vectors.sealedbox;
    expect(bytesToHex(encryptionPublicFromSecret(hexToBytes(v.recipient_secret)))).toBe(
      v.recipient_public,
    );
  });

  it("round-trips and rejects the wrong key", async () => {
    const rng = new SeededRng("box-roundtrip");
    const secret = rng.randomBytes(32);
    const other = rng.randomBytes(32);
    const payload = rng.randomBytes(1024);
    const ciphertext = await encrypt(encryptionPublicFromSecret(secret), payload, rng);
    expect(await decrypt(secret, ciphertext)).toEqual(payload);
    await expect(decrypt(other, ciphertext)).rejects.toThrow(DecryptionError);
  });
});

describe("auth message binding", () => {
  it("signs the bound challenge exactly like the server expects", async () => {
    const v = vectors.auth;
    const bound = utf8Encode(`${v.challenge}\nEncryption-Key: ${v.encryption_public}`);
    expect(bytesToHex(bound)).toBe(v.bound_hex);
    const signature = await signMessage(hexToBytes(v.signing_secret), bound);
    expect(signatureToHex(signature)).toBe(v.signature);
    expect(bytesToHex(encryptionPublicFromSecret(hexToBytes(v.encryption_secret)))).toBe(
      v.encryption_public,
    );
  });
});
