// Browser entry point: a minimal single-page walkthrough of the two
// flows. All protocol logic lives in the flow modules; this file only
// wires DOM elements to them.

import { BridgeApi } from "./api.js";
import { hexToBytes } from "./bytes.js";
import { ConsentScreen, OnboardFlow, PresentFlow, ReviewScreen } from "./flows.js";
import { UiSession } from "./session.js";
import { SoftwareKeySigner } from "./signer.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function show(id: string, text: string): void {
  el<HTMLElement>(id).textContent = text;
}

let session: UiSession | null = null;
let onboard: OnboardFlow | null = null;
let present: PresentFlow | null = null;
let consentScreen: ConsentScreen | null = null;

function renderReview(screen: ReviewScreen): void {
  const rows = screen.rows
    .map((row) => `<tr><td>${row.claim}</td><td>${row.path}</td><td>${row.value}</td></tr>`)
    .join("");
  el<HTMLElement>("review").innerHTML =
    `<p>issuer: <code>${screen.issuer}</code> (${screen.attributeCount} attributes)</p>` +
    `<table><tr><th>claim</th><th>attribute</th><th>value</th></tr>${rows}</table>`;
}

function renderConsent(screen: ConsentScreen): void {
  consentScreen = screen;
  const rows = screen.rows
    .map(
      (row, index) =>
        `<tr><td>${row.item.mode}</td><td>${row.item.attribute_path}</td>` +
        `<td>${row.display}</td>` +
        `<td>${row.upgradable ? `<button data-blind="${index}">blind</button>` : ""}</td></tr>`,
    )
    .join("");
  el<HTMLElement>("consent").innerHTML =
    `<p>presenting to <strong>${screen.verifierId}</strong></p>` +
    `<table><tr><th>mode</th><th>attribute</th><th>shown as</th><th></th></tr>${rows}</table>` +
    `<p class="preview">signs: <code>${screen.consentPreviewHex.slice(0, 48)}…</code></p>`;
  el<HTMLElement>("consent").querySelectorAll("button[data-blind]").forEach((button) => {
    button.addEventListener("click", async () => {
      const index = Number((button as HTMLElement).dataset.blind);
      renderConsent(await present!.toggleBlind(screen.rows[index].item.attribute_path));
    });
  });
}

export function wirePage(): void {
  el<HTMLButtonElement>("connect").addEventListener("click", async () => {
    try {
      const api = new BridgeApi(el<HTMLInputElement>("bridge-url").value);
      const signer = new SoftwareKeySigner(el<HTMLInputElement>("signing-key").value.trim());
      const keys = {
        signer,
        encryptionSecret: hexToBytes(el<HTMLInputElement>("encryption-key").value.trim()),
      };
      session = new UiSession(api, keys);
      await session.connect();
      onboard = new OnboardFlow(session);
      present = new PresentFlow(session);
      show("status", `connected as ${session.wallet} (session until ${session.expiresAt})`);
    } catch (error) {
      show("status", `sign-in failed: ${String(error)}`);
    }
  });

  el<HTMLButtonElement>("review-btn").addEventListener("click", async () => {
    try {
      renderReview(
        await onboard!.review(
          el<HTMLTextAreaElement>("credential").value,
          el<HTMLSelectElement>("format").value as "oidc-json" | "jwt",
        ),
      );
    } catch (error) {
      show("review", `import failed: ${String(error)}`);
    }
  });

  el<HTMLButtonElement>("upload-btn").addEventListener("click", async () => {
    try {
      const view = await onboard!.upload();
      show(
        "review",
        `bridged: h2=${view.record.h2.slice(0, 24)}… ledger seq ${view.ledgerSeq} (${view.payloadCount} payloads)`,
      );
    } catch (error) {
      show("review", `upload failed: ${String(error)}`);
    }
  });

  el<HTMLButtonElement>("cancel-btn").addEventListener("click", () => {
    onboard!.cancel();
    show("review", "cancelled; nothing uploaded");
  });

  el<HTMLButtonElement>("load-config").addEventListener("click", async () => {
    try {
      renderConsent(await present!.load(el<HTMLInputElement>("config-id").value.trim()));
    } catch (error) {
      show("consent", `cannot present: ${String(error)}`);
    }
  });

  el<HTMLButtonElement>("consent-btn").addEventListener("click", async () => {
    try {
      const { token, redirectUrl } = await present!.consent(consentScreen!);
      show("consent", `presented; token ${token}`);
      window.location.href = redirectUrl;
    } catch (error) {
      show("consent", `presentation failed: ${String(error)}`);
    }
  });

  el<HTMLButtonElement>("decline-btn").addEventListener("click", () => {
    present!.decline();
    show("consent", "declined; nothing was delivered");
  });
}

if (typeof document !== "undefined" && document.getElementById("connect")) {
  wirePage();
}
