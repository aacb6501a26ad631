import { describe, expect, it } from "vitest";

import { bytesToHex } from "../src/bytes.js";
import { CanonicalizationError, canonicalText, canonicalize, Structure } from "../src/canonical.js";
import vectors from "./interop-vectors.json";

describe("canonical encoding", () => {
  it("matches the server implementation on the golden vectors", () => {
    for (const vector of vectors.canonical) {
      expect(bytesToHex(canonicalize(vector.structure as Structure))).toBe(vector.hex);
    }
  });

  it("sorts keys by code point and drops whitespace", () => {
    expect(canonicalText({ b: 1, a: "x" })).toBe('{"a":"x","b":1}');
    expect(canonicalText({ "é": 1, z: 2 })).toBe('{"z":2,"é":1}');
    expect(canonicalText({})).toBe("{}");
  });

  it("renders integral numbers without trailing zeros", () => {
    expect(canonicalText(2024)).toBe("2024");
    expect(canonicalText(2024.0)).toBe("2024"); // same double
    expect(canonicalText(-0)).toBe("0");
    expect(canonicalText(1e16)).toBe("10000000000000000");
  });

  it("renders fractional numbers in shortest server-compatible form", () => {
    expect(canonicalText(1.5)).toBe("1.5");
    expect(canonicalText(0.1)).toBe("0.1");
    expect(canonicalText(0.0001)).toBe("0.0001");
    expect(canonicalText(0.00001)).toBe("1e-05"); // scientific below 1e-4
    expect(canonicalText(-1.5e-10)).toBe("-1.5e-10");
    expect(canonicalText(123.456)).toBe("123.456");
  });

  it("round-trips through JSON.parse", () => {
    const samples: Structure[] = [
      { a: [true, 2], b: { c: "x", d: [1.25, -7] } },
      [1, "two", false, 0.5],
      "plain",
    ];
    for (const sample of samples) {
      const once = canonicalText(sample);
      expect(canonicalText(JSON.parse(once))).toBe(once);
    }
  });

  it("rejects null and non-finite numbers", () => {
    expect(() => canonicalize(null as unknown as Structure)).toThrow(CanonicalizationError);
    expect(() => canonicalize({ a: NaN })).toThrow(CanonicalizationError);
    expect(() => canonicalize({ a: Infinity })).toThrow(CanonicalizationError);
  });
});
