// UI/CLI transcript equivalence: identical inputs driven through the CLI
// (record mode) and through the web flows produce the same wire requests.
// Randomness-bearing fields (signatures, ciphertexts, salts; all
// per-session values) are compared structurally — same place, same shape —
// everything else must be byte-identical after canonical serialization.
import { execFile } from "node:child_process";
import { createServer, Server } from "node:http";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";
import { beforeAll, afterAll, describe, expect, it } from "vitest";

import { BridgeApi, RecordedRequest } from "../src/api.js";
import { canonicalText, Structure } from "../src/canonical.js";
import { hexToBytes } from "../src/bytes.js";
import { OnboardFlow, PresentFlow } from "../src/flows.js";
import { UiSession } from "../src/session.js";
import { HolderKeys, SoftwareKeySigner } from "../src/signer.js";
import { TEST_CLOCK_START } from "./global-setup.js";

const execFileAsync = promisify(execFile);

const BRIDGE_URL = () => process.env.IDBRIDGE_TEST_URL!;
const REPO = () => process.env.IDBRIDGE_TEST_REPO!;

const DIPLOMA_PATH = () => join(REPO(), "fixtures", "demo_diploma.json");
const ISSUER = "https://registrar.unseen-university.example";

let sink: Server;
let sinkUrl: string;

beforeAll(async () => {
  sink = createServer((request, response) => {
    request.resume();
    request.on("end", () => {
      response.writeHead(200, { "content-type": "application/json" });
      response.end("{}");
    });
  });
  await new Promise<void>((resolve) => sink.listen(0, "127.0.0.1", resolve));
  sinkUrl = `http://127.0.0.1:${(sink.address() as { port: number }).port}/callback`;
});

afterAll(() => {
  sink?.close();
});

async function runCli(args: string[]): Promise<string> {
  const { stdout } = await execFileAsync(
    "python3", ["-m", "idbridge.cli", ...args], { cwd: REPO() },
  );
  return stdout;
}

/** Fields that legitimately differ between runs (fresh randomness). The
 * comparator still checks they sit in the same place with the same shape. */
function isVolatile(path: string[]): boolean {
  const joined = path.join(".");
  if (joined === "signature" || joined === "consent_signature") return true;
  if (/^ciphertexts\.\d+\.(body|ephemeral_public|nonce)$/.test(joined)) return true;
  if (/^items\.\d+\.value\.(salt|digest)$/.test(joined)) return true;
  return false;
}

function mask(node: unknown, path: string[] = []): unknown {
  if (Array.isArray(node)) return node.map((child, i) => mask(child, [...path, String(i)]));
  if (node !== null && typeof node === "object") {
    const out: Record<string, unknown> = {};
    for (const [key, value] of Object.entries(node as Record<string, unknown>)) {
      out[key] = mask(value, [...path, key]);
    }
    return out;
  }
  if (typeof node === "string" && isVolatile(path)) {
    hexToBytes(node); // must still be valid hex …
    return `<hex:${node.length}>`; // … of the same length
  }
  return node;
}

describe("UI/CLI transcript equivalence", () => {
  it("bridge + present produce matching wire traffic", async () => {
    const stateDir = mkdtempSync(join(tmpdir(), "transcript-"));
    const keysDir = join(stateDir, "keys");
    await runCli(["keygen", "--out", keysDir]);

    const keys: HolderKeys = {
      signer: new SoftwareKeySigner(
        readFileSync(join(keysDir, "signing.key"), "ascii").trim(),
      ),
      encryptionSecret: hexToBytes(
        readFileSync(join(keysDir, "encryption.key"), "ascii").trim(),
      ),
    };

    // one shared configuration presented by both front ends
    const configApi = new BridgeApi(BRIDGE_URL());
    const configId = await configApi.registerConfig("guild-crm", sinkUrl, [
      { issuer: ISSUER, claim_name: "degree", attribute_path: "degree.title", mode: "plain" },
      { issuer: ISSUER, claim_name: "degree", attribute_path: "degree.grade", mode: "blinded" },
      {
        issuer: ISSUER, claim_name: "degree", attribute_path: "degree.year",
        mode: "predicate", predicate: { operator: "gte", operand: 2020 },
      },
    ]);

    // -- CLI run, record mode ------------------------------------------------
    const cliTranscript = join(stateDir, "cli.jsonl");
    await runCli([
      "--server-url", BRIDGE_URL(), "--record", cliTranscript,
      "bridge", "--keys", keysDir, "--credential", DIPLOMA_PATH(),
    ]);
    await runCli([
      "--server-url", BRIDGE_URL(), "--record", cliTranscript, "--yes",
      "present", "--keys", keysDir, "--config-id", configId,
    ]);
    const cliRequests: RecordedRequest[] = readFileSync(cliTranscript, "utf-8")
      .split("\n").filter(Boolean).map((line) => JSON.parse(line));

    // -- web-ui run, identical inputs -----------------------------------------
    // the CLI authenticates per command, so the UI uses one session per flow
    const clock = () => TEST_CLOCK_START; // server runs on the frozen test clock
    const onboardSession = new UiSession(new BridgeApi(BRIDGE_URL()), keys, clock);
    await onboardSession.connect();
    const onboard = new OnboardFlow(onboardSession);
    await onboard.review(readFileSync(DIPLOMA_PATH(), "utf-8"), "oidc-json");
    await onboard.upload();

    const presentSession = new UiSession(new BridgeApi(BRIDGE_URL()), keys, clock);
    await presentSession.connect();
    const present = new PresentFlow(presentSession);
    const screen = await present.load(configId);
    await present.consent(screen);

    const uiRequests = [
      ...(onboardSession.api as BridgeApi).recorded,
      ...(presentSession.api as BridgeApi).recorded,
    ];

    // -- structural comparison -------------------------------------------------
    expect(uiRequests.map((r) => `${r.method} ${r.path}`)).toEqual(
      cliRequests.map((r) => `${r.method} ${r.path}`),
    );
    for (let i = 0; i < cliRequests.length; i++) {
      const cliBody = canonicalText(mask(cliRequests[i].body) as Structure);
      const uiBody = canonicalText(mask(uiRequests[i].body) as Structure);
      expect(uiBody, `${cliRequests[i].method} ${cliRequests[i].path}`).toBe(cliBody);
    }

    // the equivalence is not vacuous: deterministic payload commitments match exactly
    const cliStore = cliRequests.find((r) => r.path === "/claims" && r.method === "POST")!;
    const uiStore = uiRequests.find((r) => r.path === "/claims" && r.method === "POST")!;
    expect((uiStore.body as { h1: string }).h1).toBe((cliStore.body as { h1: string }).h1);
    expect((uiStore.body as { encryption_public: string }).encryption_public).toBe(
      (cliStore.body as { encryption_public: string }).encryption_public,
    );
  });
});
