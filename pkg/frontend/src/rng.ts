// Platform CSPRNG behind a small interface so tests can inject a
// deterministic stream.

export interface Rng {
  randomBytes(n: number): Uint8Array;
}

export const systemRng: Rng = {
  randomBytes(n: number): Uint8Array {
    if (n < 1) throw new Error("n must be positive");
    const out = new Uint8Array(n);
    globalThis.crypto.getRandomValues(out);
    return out;
  },
};
