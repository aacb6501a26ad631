// Session state machine. Flow steps past "connected" are unreachable
// without a live (unexpired) session, and the serializable state carries
// no plaintext attribute values — those live only inside flow objects in
// memory.

import { bytesToHex, utf8Encode } from "./bytes.js";
import { BridgeApi } from "./api.js";
import { signatureToHex } from "./secp256k1.js";
import { encryptionPublicFromSecret } from "./sealedbox.js";
import { HolderKeys } from "./signer.js";

export type FlowStep =
  | "disconnected"
  | "connected"
  | "reviewing-import"
  | "uploading"
  | "bridged"
  | "selecting-disclosures"
  | "consent"
  | "presented";

export class SessionExpiredError extends Error {
  constructor() {
    super("session expired; sign in again");
  }
}

export class UiSession {
  step: FlowStep = "disconnected";
  wallet: string | null = null;
  expiresAt: number | null = null;
  encryptionPublic: Uint8Array | null = null;

  constructor(
    readonly api: BridgeApi,
    readonly keys: HolderKeys,
    private now: () => number = () => Math.floor(Date.now() / 1000),
  ) {}

  get connected(): boolean {
    return this.wallet !== null && this.expiresAt !== null && this.now() < this.expiresAt;
  }

  /** Sign-in-with-wallet: challenge, sign with the encryption key bound
   * into the message, verify. */
  async connect(): Promise<void> {
    const address = this.keys.signer.address;
    const challenge = await this.api.createChallenge(address);
    this.encryptionPublic = encryptionPublicFromSecret(this.keys.encryptionSecret);
    const bound = utf8Encode(
      `${challenge.message}\nEncryption-Key: ${bytesToHex(this.encryptionPublic)}`,
    );
    const signature = await this.keys.signer.signMessage(bound);
    const verified = await this.api.verifyAuth(
      address, bytesToHex(this.encryptionPublic), signatureToHex(signature),
    );
    this.wallet = verified.wallet;
    this.expiresAt = verified.expires_at;
    this.step = "connected";
  }

  /** Guard for every step past "connected". */
  requireLive(): void {
    if (!this.connected) {
      this.step = "disconnected";
      throw new SessionExpiredError();
    }
  }

  advance(step: FlowStep): void {
    if (step !== "disconnected" && step !== "connected") this.requireLive();
    this.step = step;
  }

  /** The only state the UI may persist; never any attribute plaintext. */
  serializable(): { step: FlowStep; wallet: string | null; expiresAt: number | null } {
    return { step: this.step, wallet: this.wallet, expiresAt: this.expiresAt };
  }
}
