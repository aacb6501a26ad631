// Wire-level types of the bridge HTTP API (hex-encoded JSON bodies).

import { bytesToHex, hexToBytes } from "./bytes.js";
import type { Scalar } from "./canonical.js";
import type { Ciphertext } from "./sealedbox.js";

export type DisclosureMode = "plain" | "blinded" | "predicate";

export interface PredicateWire {
  operator: "eq" | "neq" | "gt" | "gte" | "lt" | "lte" | "contains";
  operand: Scalar;
}

export interface DisclosureRequestWire {
  issuer: string;
  claim_name: string;
  attribute_path: string;
  mode: DisclosureMode;
  predicate?: PredicateWire;
}

export interface PresentationConfigWire {
  config_id: string;
  verifier_id: string;
  callback_url: string;
  requests: DisclosureRequestWire[];
  created_at: number;
}

export interface CiphertextWire {
  body: string;
  ephemeral_public: string;
  nonce: string;
}

export interface PayloadDescriptorWire {
  index: number;
  kind: "attribute" | "provenance";
  claim_name?: string;
  attribute_path?: string;
}

export interface BridgeSubmissionWire {
  encryption_public: string;
  issuer: string;
  ciphertexts: CiphertextWire[];
  h1: string;
  payload_descriptors: PayloadDescriptorWire[];
}

export interface LedgerTxRefWire {
  backend_id: string;
  seq: number;
  content_hash: string;
}

export interface BridgeRecordWire {
  wallet: string;
  h2: string;
  server_signature: string;
  ledger_ref: LedgerTxRefWire;
  created_at: number;
}

export interface ClaimsSummaryWire {
  issuer: string;
  payload_count: number;
  descriptors: PayloadDescriptorWire[];
  bridge_record: BridgeRecordWire;
}

export interface FetchClaimsWire {
  issuer: string;
  h1: string;
  ciphertexts: CiphertextWire[];
  descriptors: PayloadDescriptorWire[];
  bridge_record: BridgeRecordWire;
}

export type BlindedValueWire = { salt: string; digest: string };
export type DisclosedValueWire = Scalar | BlindedValueWire;

export interface DisclosedItemWire {
  issuer: string;
  claim_name: string;
  attribute_path: string;
  mode: DisclosureMode;
  value: DisclosedValueWire;
}

export interface DisclosureSetWire {
  config_id: string;
  wallet: string;
  items: DisclosedItemWire[];
  consent_signature?: string;
}

export function ciphertextToWire(ct: Ciphertext): CiphertextWire {
  return {
    body: bytesToHex(ct.body),
    ephemeral_public: bytesToHex(ct.ephemeralPublic),
    nonce: bytesToHex(ct.nonce),
  };
}

export function ciphertextFromWire(wire: CiphertextWire): Ciphertext {
  return {
    ephemeralPublic: hexToBytes(wire.ephemeral_public),
    nonce: hexToBytes(wire.nonce),
    body: hexToBytes(wire.body),
  };
}
