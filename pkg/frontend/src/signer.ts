// Wallet abstraction: the UI never touches a signing key directly, it
// asks a Signer. The software signer backs automated tests and demo use;
// a browser-extension wallet implements the same interface in production.

import { hexToBytes } from "./bytes.js";
import {
  deriveAddress,
  publicFromSecret,
  Signature,
  signatureToHex,
  signMessage,
} from "./secp256k1.js";

export interface Signer {
  readonly address: string;
  signMessage(message: Uint8Array): Promise<Signature>;
}

export class SoftwareKeySigner implements Signer {
  readonly address: string;
  readonly publicKey: Uint8Array;
  private secret: Uint8Array;
  /** Messages this signer was asked to sign (what-you-see-is-what-you-sign audits). */
  readonly signedMessages: Uint8Array[] = [];

  constructor(signingSecretHex: string | Uint8Array) {
    this.secret = typeof signingSecretHex === "string" ? hexToBytes(signingSecretHex) : signingSecretHex;
    this.publicKey = publicFromSecret(this.secret);
    this.address = deriveAddress(this.publicKey);
  }

  async signMessage(message: Uint8Array): Promise<Signature> {
    this.signedMessages.push(message);
    return signMessage(this.secret, message);
  }
}

export interface HolderKeys {
  signer: Signer;
  /** X25519 secret for decrypting bridged payloads; stays in client memory. */
  encryptionSecret: Uint8Array;
}

export { signatureToHex };
