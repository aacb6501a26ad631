// Client-side claims processing: parse a credential, flatten claims into
// scalar attributes, build the attribute + provenance payloads, and seal
// them to the holder's encryption key. Plaintext never leaves this module
// except inside consent-approved plain disclosures.

import { canonicalize, Scalar } from "./canonical.js";
import { sha512 } from "./hash.js";
import { Rng, systemRng } from "./rng.js";
import { encrypt } from "./sealedbox.js";
import {
  BridgeSubmissionWire,
  ciphertextToWire,
  PayloadDescriptorWire,
} from "./wire.js";
import { bytesToHex, utf8Decode } from "./bytes.js";

export type ImportFormat = "oidc-json" | "jwt";

export interface AttributeView {
  path: string;
  value: Scalar;
}

export interface ClaimView {
  name: string;
  attributes: AttributeView[];
}

export interface ParsedImport {
  issuer: string;
  claims: ClaimView[];
}

export class ImportParseError extends Error {
  constructor(message: string, readonly fieldPath?: string) {
    super(message);
  }
}

const JWT_REGISTERED = ["iat", "exp", "nbf", "aud", "sub"];
const META_CLAIM = "_meta";

function flatten(value: unknown, path: string, out: AttributeView[]): void {
  if (value === null) {
    throw new ImportParseError(`null value at ${path}; attributes must be scalars`, path);
  }
  if (Array.isArray(value)) {
    if (value.length === 0) throw new ImportParseError(`empty array at ${path}`, path);
    value.forEach((child, index) => flatten(child, `${path}.${index}`, out));
    return;
  }
  if (typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>);
    if (entries.length === 0) throw new ImportParseError(`empty object at ${path}`, path);
    for (const [key, child] of entries) flatten(child, `${path}.${key}`, out);
    return;
  }
  if (typeof value === "string" || typeof value === "number" || typeof value === "boolean") {
    out.push({ path, value });
    return;
  }
  throw new ImportParseError(`unsupported value at ${path}`, path);
}

function claimsFromObject(document: Record<string, unknown>): ParsedImport {
  const issuer = document["iss"];
  if (typeof issuer !== "string" || !issuer) {
    throw new ImportParseError("credential has no issuer (`iss`) member", "iss");
  }
  const claims: ClaimView[] = [];
  for (const [name, value] of Object.entries(document)) {
    if (name === "iss") continue;
    const attributes: AttributeView[] = [];
    flatten(value, name, attributes);
    claims.push({ name, attributes });
  }
  if (claims.length === 0) {
    throw new ImportParseError("credential carries no claims besides the issuer");
  }
  return { issuer, claims };
}

function decodeJwtPayload(text: string): Record<string, unknown> {
  const parts = text.trim().split(".");
  if (parts.length !== 3) {
    throw new ImportParseError("JWT must be a three-part compact serialization");
  }
  let decoded: string;
  try {
    const base64 = parts[1].replace(/-/g, "+").replace(/_/g, "/");
    decoded = atob(base64 + "=".repeat((4 - (base64.length % 4)) % 4));
  } catch {
    throw new ImportParseError("JWT payload does not decode");
  }
  const bytes = Uint8Array.from(decoded, (c) => c.charCodeAt(0));
  let document: unknown;
  try {
    document = JSON.parse(utf8Decode(bytes));
  } catch (error) {
    throw new ImportParseError(`JWT payload is not JSON: ${String(error)}`);
  }
  if (document === null || typeof document !== "object" || Array.isArray(document)) {
    throw new ImportParseError("JWT payload is not a JSON object");
  }
  return document as Record<string, unknown>;
}

export function parseImport(text: string, format: ImportFormat): ParsedImport {
  if (format === "oidc-json") {
    let document: unknown;
    try {
      document = JSON.parse(text);
    } catch (error) {
      throw new ImportParseError(`credential is not valid JSON: ${String(error)}`);
    }
    if (document === null || typeof document !== "object" || Array.isArray(document)) {
      throw new ImportParseError("credential must be a JSON object");
    }
    return claimsFromObject(document as Record<string, unknown>);
  }
  if (format === "jwt") {
    const document = decodeJwtPayload(text);
    const registered: Record<string, unknown> = {};
    const body: Record<string, unknown> = {};
    for (const [key, value] of Object.entries(document)) {
      (JWT_REGISTERED.includes(key) ? registered : body)[key] = value;
    }
    const parsed = claimsFromObject(body);
    if (Object.keys(registered).length > 0) {
      const attributes: AttributeView[] = [];
      flatten(registered, META_CLAIM, attributes);
      parsed.claims.push({ name: META_CLAIM, attributes });
    }
    return parsed;
  }
  throw new ImportParseError(`unknown import format: ${format}`);
}

export interface PayloadView {
  index: number;
  kind: "attribute" | "provenance";
  claimName?: string;
  attributePath?: string;
  content: Uint8Array;
}

export interface PayloadBundleView {
  payloads: PayloadView[];
  h1: Uint8Array;
}

export async function buildPayloads(parsed: ParsedImport): Promise<PayloadBundleView> {
  const payloads: PayloadView[] = [];
  let index = 0;
  for (const claim of parsed.claims) {
    for (const attribute of claim.attributes) {
      index += 1;
      payloads.push({
        index,
        kind: "attribute",
        claimName: claim.name,
        attributePath: attribute.path,
        content: canonicalize({
          issuer: parsed.issuer,
          claim_name: claim.name,
          attribute_path: attribute.path,
          value: attribute.value,
        }),
      });
    }
  }
  payloads.push({
    index: index + 1,
    kind: "provenance",
    content: canonicalize({
      issuer: parsed.issuer,
      claims: parsed.claims.map((claim) => ({
        name: claim.name,
        attributes: claim.attributes.map((a) => ({ path: a.path, value: a.value })),
      })),
    }),
  });
  return { payloads, h1: await sha512(payloads[0].content) };
}

export async function encryptBundle(
  bundle: PayloadBundleView,
  encryptionPublic: Uint8Array,
  issuer: string,
  rng: Rng = systemRng,
): Promise<BridgeSubmissionWire> {
  const ciphertexts = [];
  const descriptors: PayloadDescriptorWire[] = [];
  for (const payload of bundle.payloads) {
    ciphertexts.push(ciphertextToWire(await encrypt(encryptionPublic, payload.content, rng)));
    const descriptor: PayloadDescriptorWire = { index: payload.index, kind: payload.kind };
    if (payload.claimName !== undefined) descriptor.claim_name = payload.claimName;
    if (payload.attributePath !== undefined) descriptor.attribute_path = payload.attributePath;
    descriptors.push(descriptor);
  }
  return {
    encryption_public: bytesToHex(encryptionPublic),
    issuer,
    ciphertexts,
    h1: bytesToHex(bundle.h1),
    payload_descriptors: descriptors,
  };
}
