// Canonical JSON byte encoding — must agree bit-for-bit with the server
// side for every hash and signature. Rules: UTF-8, no whitespace, map keys
// sorted by Unicode code point, booleans as literals, integral numbers as
// plain digits, other finite numbers in shortest decimal with scientific
// notation only below 1e-4. null/NaN/infinities are rejected.

import { utf8Encode } from "./bytes.js";

export type Scalar = string | number | boolean;
export type Structure = Scalar | Structure[] | { [key: string]: Structure };

export class CanonicalizationError extends Error {}

export function canonicalize(structure: Structure): Uint8Array {
  return utf8Encode(render(structure));
}

export function canonicalText(structure: Structure): string {
  return render(structure);
}

function render(value: Structure): string {
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "string") return JSON.stringify(value);
  if (typeof value === "number") return renderNumber(value);
  if (Array.isArray(value)) return "[" + value.map(render).join(",") + "]";
  if (value !== null && typeof value === "object") {
    const keys = Object.keys(value).sort(compareCodePoints);
    const parts = keys.map((k) => JSON.stringify(k) + ":" + render(value[k]));
    return "{" + parts.join(",") + "}";
  }
  throw new CanonicalizationError(`no canonical form for ${value === null ? "null" : typeof value}`);
}

function renderNumber(value: number): string {
  if (!Number.isFinite(value)) {
    throw new CanonicalizationError("NaN and infinities are not representable");
  }
  if (Number.isInteger(value)) return BigInt(value).toString();
  // Non-integral double: shortest digits, then the fixed/scientific
  // switchover the server uses (scientific iff exponent < -4; doubles with
  // exponent >= 16 are always integral, so that branch cannot occur here).
  const { negative, digits, exponent } = decompose(value.toString());
  if (exponent < -4) {
    const mantissa = digits.length > 1 ? `${digits[0]}.${digits.slice(1)}` : digits;
    const magnitude = String(-exponent).padStart(2, "0");
    return `${negative ? "-" : ""}${mantissa}e-${magnitude}`;
  }
  // non-integral, so at least one significant digit sits right of the point
  if (exponent >= 0) {
    const head = digits.slice(0, exponent + 1);
    const tail = digits.slice(exponent + 1);
    return `${negative ? "-" : ""}${head}.${tail}`;
  }
  return `${negative ? "-" : ""}0.${"0".repeat(-exponent - 1)}${digits}`;
}

// Split a JS number string (either "123.45" or "1.5e-7") into shortest
// significant digits plus the decimal exponent of the leading digit.
function decompose(text: string): { negative: boolean; digits: string; exponent: number } {
  let negative = false;
  if (text.startsWith("-")) {
    negative = true;
    text = text.slice(1);
  }
  let mantissa = text;
  let exp = 0;
  const eIndex = text.indexOf("e");
  if (eIndex >= 0) {
    mantissa = text.slice(0, eIndex);
    exp = parseInt(text.slice(eIndex + 1), 10);
  }
  const point = mantissa.indexOf(".");
  const raw = point >= 0 ? mantissa.slice(0, point) + mantissa.slice(point + 1) : mantissa;
  const intLength = point >= 0 ? point : mantissa.length;
  const firstSignificant = raw.search(/[1-9]/);
  if (firstSignificant < 0) throw new CanonicalizationError("zero reached non-integral path");
  const digits = raw.slice(firstSignificant).replace(/0+$/, "");
  const exponent = intLength - 1 - firstSignificant + exp;
  return { negative, digits, exponent };
}

export function compareCodePoints(a: string, b: string): number {
  const aPoints = Array.from(a);
  const bPoints = Array.from(b);
  const shared = Math.min(aPoints.length, bPoints.length);
  for (let i = 0; i < shared; i++) {
    const diff = aPoints[i].codePointAt(0)! - bPoints[i].codePointAt(0)!;
    if (diff !== 0) return diff;
  }
  return aPoints.length - bPoints.length;
}
