// Test-only deterministic byte stream mirroring the server's seeded
// generator exactly: SHA-512 over seed || 8-byte big-endian counter.
import { createHash } from "node:crypto";

import { concatBytes, utf8Encode } from "../src/bytes.js";
import type { Rng } from "../src/rng.js";

export class SeededRng implements Rng {
  private seed: Uint8Array;
  private counter = 0n;
  private buffer = new Uint8Array(0);

  constructor(seed: string | Uint8Array) {
    this.seed = typeof seed === "string" ? utf8Encode(seed) : seed;
  }

  randomBytes(n: number): Uint8Array {
    if (n < 1) throw new Error("n must be positive");
    while (this.buffer.length < n) {
      const counterBytes = new Uint8Array(8);
      new DataView(counterBytes.buffer).setBigUint64(0, this.counter, false);
      this.counter += 1n;
      const block = createHash("sha512").update(this.seed).update(counterBytes).digest();
      this.buffer = concatBytes(this.buffer, new Uint8Array(block));
    }
    const out = this.buffer.slice(0, n);
    this.buffer = this.buffer.slice(n);
    return out;
  }
}
