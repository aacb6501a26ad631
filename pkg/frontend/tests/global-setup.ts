// Boots the real bridge server (the Python package in this repository) so
// the UI tests exercise the actual HTTP surface, nothing mocked.
import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

const REPO_ROOT = resolve(__dirname, "..", "..");
export const TEST_CLOCK_START = 1_700_000_000;

async function freePort(): Promise<number> {
  return new Promise((resolvePort) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const port = (server.address() as { port: number }).port;
      server.close(() => resolvePort(port));
    });
  });
}

async function waitReady(url: string, child: ChildProcess): Promise<void> {
  const deadline = Date.now() + 30_000;
  for (;;) {
    if (child.exitCode !== null) throw new Error(`bridge server exited: ${child.exitCode}`);
    try {
      const response = await fetch(`${url}/server/key`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("bridge server did not come up");
    await new Promise((r) => setTimeout(r, 100));
  }
}

let child: ChildProcess;

export async function setup(): Promise<void> {
  const stateDir = mkdtempSync(join(tmpdir(), "idbridge-ui-"));
  const port = await freePort();
  const url = `http://127.0.0.1:${port}`;
  const ledgerPath = join(stateDir, "ledger.log");

  child = spawn(
    "python3",
    ["-m", "uvicorn", "--factory", "idbridge.server.http:app_from_env",
     "--host", "127.0.0.1", "--port", String(port), "--log-level", "error"],
    {
      cwd: REPO_ROOT,
      env: {
        ...process.env,
        IDBRIDGE_STORE_PATH: join(stateDir, "store.json"),
        IDBRIDGE_LEDGER_PATH: ledgerPath,
        IDBRIDGE_SERVER_KEY_PATH: join(stateDir, "server.key"),
        IDBRIDGE_ORIGIN: "http://ui.test",
        IDBRIDGE_TEST_CLOCK: String(TEST_CLOCK_START),
      },
      stdio: ["ignore", "inherit", "inherit"],
    },
  );
  await waitReady(url, child);

  process.env.IDBRIDGE_TEST_URL = url;
  process.env.IDBRIDGE_TEST_LEDGER = ledgerPath;
  process.env.IDBRIDGE_TEST_STATE_DIR = stateDir;
  process.env.IDBRIDGE_TEST_REPO = REPO_ROOT;
}

export async function teardown(): Promise<void> {
  child?.kill("SIGTERM");
  await new Promise((r) => setTimeout(r, 200));
  child?.kill("SIGKILL");
}
