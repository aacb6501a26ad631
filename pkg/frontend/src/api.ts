// Typed client for the bridge HTTP API. In a browser the session cookie
// rides automatically (credentials: include); under Node the Set-Cookie
// header is readable, so a manual jar keeps integration tests honest.
// Every request can be recorded for transcript comparison against other
// front ends.

import {
  BridgeRecordWire,
  BridgeSubmissionWire,
  ClaimsSummaryWire,
  DisclosureRequestWire,
  DisclosureSetWire,
  FetchClaimsWire,
  PresentationConfigWire,
} from "./wire.js";

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

export class ApiError extends Error {
  constructor(readonly code: string, readonly detail: string, readonly status: number) {
    super(`${code}: ${detail}`);
  }
}

export class BridgeApi {
  private cookie: string | null = null;
  readonly recorded: RecordedRequest[] = [];

  constructor(readonly baseUrl: string) {}

  private async request(
    method: string, path: string, body?: unknown, query?: Record<string, string>,
  ): Promise<unknown> {
    // for GETs the query parameters are the recorded "body", like the CLI
    this.recorded.push({ method, path, body: body ?? query ?? {} });
    const headers: Record<string, string> = {};
    const init: RequestInit = { method, credentials: "include" };
    if (body !== undefined) {
      headers["content-type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    if (this.cookie) headers["cookie"] = this.cookie;
    init.headers = headers;
    const queryString = query ? new URLSearchParams(query).toString() : "";
    const url = this.baseUrl + path + (queryString ? `?${queryString}` : "");
    const response = await fetch(url, init);
    const setCookie = response.headers.get("set-cookie");
    if (setCookie) this.cookie = setCookie.split(";")[0];
    if (!response.ok) {
      let code = "protocol_error";
      let detail = `HTTP ${response.status}`;
      try {
        const parsed = (await response.json()) as { error?: string; detail?: string };
        code = parsed.error ?? code;
        detail = parsed.detail ?? detail;
      } catch {
        // non-JSON error body
      }
      throw new ApiError(code, detail, response.status);
    }
    return response.json();
  }

  async serverKey(): Promise<string> {
    const body = (await this.request("GET", "/server/key")) as { verification_key: string };
    return body.verification_key;
  }

  async createChallenge(wallet: string): Promise<{ nonce: string; message: string }> {
    return (await this.request("POST", "/auth/challenge", { wallet })) as {
      nonce: string;
      message: string;
    };
  }

  async verifyAuth(
    wallet: string, encryptionPublicHex: string, signatureHex: string,
  ): Promise<{ wallet: string; expires_at: number }> {
    return (await this.request("POST", "/auth/verify", {
      wallet,
      encryption_public: encryptionPublicHex,
      signature: signatureHex,
    })) as { wallet: string; expires_at: number };
  }

  async storeClaims(submission: BridgeSubmissionWire): Promise<BridgeRecordWire> {
    return (await this.request("POST", "/claims", submission)) as BridgeRecordWire;
  }

  async listClaims(): Promise<ClaimsSummaryWire[]> {
    const body = (await this.request("GET", "/claims")) as { claims: ClaimsSummaryWire[] };
    return body.claims;
  }

  async fetchClaims(issuer: string, indices?: number[]): Promise<FetchClaimsWire> {
    const query =
      indices && indices.length > 0 ? { indices: indices.join(",") } : undefined;
    return (await this.request(
      "GET", `/claims/${encodeURIComponent(issuer)}`, undefined, query,
    )) as FetchClaimsWire;
  }

  async deleteClaims(issuer: string): Promise<{ deleted: boolean }> {
    return (await this.request(
      "DELETE", `/claims/${encodeURIComponent(issuer)}`,
    )) as { deleted: boolean };
  }

  async registerConfig(
    verifierId: string, callbackUrl: string, requests: DisclosureRequestWire[],
  ): Promise<string> {
    const body = (await this.request("POST", "/presentations/configs", {
      verifier_id: verifierId,
      callback_url: callbackUrl,
      requests,
    })) as { config_id: string };
    return body.config_id;
  }

  async getConfig(configId: string): Promise<PresentationConfigWire> {
    return (await this.request(
      "GET", `/presentations/configs/${configId}`,
    )) as PresentationConfigWire;
  }

  async submitPresentation(
    configId: string, disclosure: DisclosureSetWire,
  ): Promise<{ token: string; redirect_url: string }> {
    return (await this.request("POST", `/presentations/${configId}`, disclosure)) as {
      token: string;
      redirect_url: string;
    };
  }
}
