"""Operational entry points: run the server, drive holder flows headlessly,
run a demo verifier, and inspect the ledger."""
from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Optional

import click
import httpx
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import claims as claims_mod
from .client import BridgeClient
from .crypto.sealedbox import decrypt
from .errors import (
    LedgerAuditError,
    MissingAttribute,
    ProtocolError,
)
from .ledger import FileLedger
from .model import (
    DisclosureRequest,
    WalletIdentity,
    ciphertext_from_wire,
)
from .verifier import SybilPolicy, receive_presentation

# Distinct, machine-parsable exit code per error class (0 = ok, 2 = usage).
EXIT_CODES = {
    "import_error": 3,
    "auth_failed": 4,
    "replay_detected": 5,
    "session_expired": 6,
    "not_found": 7,
    "missing_attribute": 8,
    "mode_violation": 9,
    "consent_invalid": 10,
    "incomplete_disclosure": 11,
    "delivery_failed": 12,
    "malformed_submission": 13,
    "predicate_type_error": 14,
    "decryption_error": 15,
    "ledger_error": 16,
    "ledger_audit_error": 17,
    "token_mismatch": 18,
    "malformed_payload": 19,
    "protocol_error": 21,
}
EXIT_CONNECTION_ERROR = 20

SIGNING_KEY_FILE = "signing.key"
ENCRYPTION_KEY_FILE = "encryption.key"


def _fail(code: str, detail: str) -> "click.exceptions.Exit":
    click.echo(json.dumps({"error": code, "detail": detail}), err=True)
    sys.exit(EXIT_CODES.get(code, EXIT_CODES["protocol_error"]))


def _run(ctx: click.Context, fn, *args, **kwargs):
    """Execute a command body, mapping protocol errors to exit codes."""
    try:
        return fn(*args, **kwargs)
    except ProtocolError as exc:
        _fail(exc.code, str(exc))
    except httpx.HTTPError as exc:
        click.echo(json.dumps({"error": "connection_error", "detail": str(exc)}), err=True)
        sys.exit(EXIT_CONNECTION_ERROR)


def _emit(ctx: click.Context, data, table_lines=None) -> None:
    if ctx.obj["output"] == "json" or table_lines is None:
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    else:
        for line in table_lines:
            click.echo(line)


def _client(ctx: click.Context) -> BridgeClient:
    return BridgeClient(ctx.obj["server_url"], record_path=ctx.obj["record"])


# -- key management ------------------------------------------------------------

def save_identity(identity: WalletIdentity, directory: Path, force: bool = False) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for name, secret in (
        (SIGNING_KEY_FILE, identity.signing_secret),
        (ENCRYPTION_KEY_FILE, identity.encryption_secret),
    ):
        path = directory / name
        if path.exists() and not force:
            raise FileExistsError(f"{path} exists; pass --force to overwrite")
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w", encoding="ascii") as handle:
            handle.write(secret.hex() + "\n")


def load_identity(directory: Path) -> WalletIdentity:
    signing = bytes.fromhex((directory / SIGNING_KEY_FILE).read_text().strip())
    encryption = bytes.fromhex((directory / ENCRYPTION_KEY_FILE).read_text().strip())
    return WalletIdentity.from_secrets(signing, encryption)


# -- command group ----------------------------------------------------------------

@click.group()
@click.option("--server-url", default="http://127.0.0.1:8420", show_default=True, help="Bridge server base URL.")
@click.option("--output", type=click.Choice(["json", "table"]), default="table", show_default=True)
@click.option("--yes", is_flag=True, help="Assume consent; never prompt.")
@click.option("--record", type=click.Path(dir_okay=False), default=None, help="Append every wire request to this JSONL file.")
@click.pass_context
def main(ctx, server_url, output, yes, record):
    """Bridge credentials of centralised provenance to a wallet identity."""
    ctx.ensure_object(dict)
    ctx.obj.update(server_url=server_url, output=output, yes=yes, record=record)


@main.command()
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--force", is_flag=True, help="Overwrite existing key files.")
@click.pass_context
def keygen(ctx, out_dir: Path, force: bool):
    """Generate wallet signing + encryption keys."""
    identity = WalletIdentity.generate()
    try:
        save_identity(identity, out_dir, force=force)
    except FileExistsError as exc:
        click.echo(json.dumps({"error": "key_exists", "detail": str(exc)}), err=True)
        sys.exit(2)
    _emit(ctx, {"address": identity.address, "keys": str(out_dir)}, [f"address: {identity.address}", f"keys:    {out_dir}"])


@main.command()
@click.option("--keys", "key_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--credential", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--format", "credential_format", type=click.Choice(list(claims_mod.IMPORT_FORMATS)), default="oidc-json", show_default=True)
@click.pass_context
def bridge(ctx, key_dir: Path, credential: Path, credential_format: str):
    """Parse, encrypt, and upload a credential; prints the bridge record."""

    def body():
        identity = load_identity(key_dir)
        imported = claims_mod.parse_import(credential.read_bytes(), credential_format)
        bundle = claims_mod.build_payloads(imported)
        submission = claims_mod.encrypt_bundle(bundle, identity.encryption_public, imported.issuer)
        with _client(ctx) as client:
            client.authenticate(identity)
            record = client.store_claims(submission)
        wire = record.to_wire()
        _emit(
            ctx,
            wire,
            [
                f"issuer:     {imported.issuer}",
                f"payloads:   {len(bundle.payloads)}",
                f"h2:         {wire['h2']}",
                f"ledger seq: {wire['ledger_ref']['seq']}",
            ],
        )

    _run(ctx, body)


def _review_lines(disclosure) -> list[str]:
    lines = []
    for item in disclosure.items:
        if item.mode == "plain":
            shown = repr(item.value)
        elif item.mode == "blinded":
            shown = f"salted hash of {item.attribute_path}"
        else:
            shown = f"statement is {item.value}"
        lines.append(f"  [{item.mode:9}] {item.issuer} {item.attribute_path} -> {shown}")
    return lines


@main.command()
@click.option("--keys", "key_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--config-id", required=True)
@click.option("--blind", "blind_paths", multiple=True, help="Upgrade a plain request for this attribute path to blinded.")
@click.pass_context
def present(ctx, key_dir: Path, config_id: str, blind_paths: tuple[str, ...]):
    """Fetch, decrypt, select, consent-sign, and submit a presentation."""

    def body():
        identity = load_identity(key_dir)
        with _client(ctx) as client:
            client.authenticate(identity)
            config = client.get_config(config_id)

            # Selective fetch: only the attribute payloads the request names.
            summaries = {entry["issuer"]: entry for entry in client.list_claims()}
            values: dict[tuple[str, str, str], object] = {}
            for issuer in sorted({r.issuer for r in config.requests}):
                summary = summaries.get(issuer)
                if summary is None:
                    raise MissingAttribute(
                        next(r.attribute_path for r in config.requests if r.issuer == issuer)
                    )
                wanted = {
                    (d["claim_name"], d["attribute_path"]): d["index"]
                    for d in summary["descriptors"]
                    if d["kind"] == "attribute"
                }
                indices = []
                for request in config.requests:
                    if request.issuer != issuer:
                        continue
                    index = wanted.get((request.claim_name, request.attribute_path))
                    if index is None:
                        raise MissingAttribute(request.attribute_path)
                    indices.append(index)
                fetched = client.fetch_claims(issuer, sorted(set(indices)))
                for descriptor, ciphertext in zip(fetched["descriptors"], fetched["ciphertexts"]):
                    plaintext = decrypt(identity.encryption_secret, ciphertext_from_wire(ciphertext))
                    body_map = json.loads(plaintext)
                    values[(issuer, descriptor["claim_name"], descriptor["attribute_path"])] = body_map["value"]

            choices = {
                request.key(): "blinded"
                for request in config.requests
                if request.attribute_path in set(blind_paths)
            }
            disclosure = claims_mod.select_disclosures(config, values, identity.address, choices)

            click.echo(f"about to present to {config.verifier_id}:")
            for line in _review_lines(disclosure):
                click.echo(line)
            if not ctx.obj["yes"] and not click.confirm("consent and sign?"):
                click.echo("aborted; nothing was presented")
                sys.exit(0)

            signed = claims_mod.sign_consent(identity, disclosure)
            result = client.submit_presentation(config_id, signed)
        _emit(
            ctx,
            {"token": result["token"], "redirect_url": result["redirect_url"], "items": [i.to_wire() for i in signed.items]},
            [f"token:    {result['token']}", f"redirect: {result['redirect_url']}"],
        )

    _run(ctx, body)


# -- claims management -------------------------------------------------------------

@main.group("claims")
def claims_group():
    """List, fetch, or delete bridged claims."""


@claims_group.command("list")
@click.option("--keys", "key_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.pass_context
def claims_list(ctx, key_dir: Path):
    def body():
        identity = load_identity(key_dir)
        with _client(ctx) as client:
            client.authenticate(identity)
            entries = client.list_claims()
        lines = [f"{e['issuer']}  payloads={e['payload_count']}  h2={e['bridge_record']['h2'][:16]}…" for e in entries]
        _emit(ctx, entries, lines or ["(no bridged claims)"])

    _run(ctx, body)


@claims_group.command("fetch")
@click.option("--keys", "key_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--issuer", required=True)
@click.option("--indices", default=None, help="Comma-separated payload indices.")
@click.pass_context
def claims_fetch(ctx, key_dir: Path, issuer: str, indices: Optional[str]):
    def body():
        identity = load_identity(key_dir)
        index_filter = [int(p) for p in indices.split(",") if p] if indices else None
        with _client(ctx) as client:
            client.authenticate(identity)
            fetched = client.fetch_claims(issuer, index_filter)
        _emit(ctx, fetched, [json.dumps(fetched, indent=2)])

    _run(ctx, body)


@claims_group.command("delete")
@click.option("--keys", "key_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--issuer", required=True)
@click.pass_context
def claims_delete(ctx, key_dir: Path, issuer: str):
    def body():
        identity = load_identity(key_dir)
        with _client(ctx) as client:
            client.authenticate(identity)
            result = client.delete_claims(issuer)
        _emit(ctx, result, [f"deleted claims for {issuer}"])

    _run(ctx, body)


# -- demo verifier -------------------------------------------------------------------

def build_verifier_app(
    *,
    verifier_id: str,
    issuer_id: str,
    server_key: bytes,
    ledger_path: str,
    policy: SybilPolicy,
    issue_dir: Optional[Path],
):
    """Relying-party demo app: receives callbacks, verifies, and re-issues
    a member-profile credential built from the disclosed plain values."""
    app = FastAPI(title=f"verifier:{verifier_id}", docs_url=None, redoc_url=None)
    app.state.reports = {}

    @app.post("/callback")
    async def callback(request: Request):
        payload = await request.json()
        try:
            report = receive_presentation(
                payload, server_key, FileLedger(ledger_path), policy
            )
        except ProtocolError as exc:
            return JSONResponse(status_code=exc.http_status, content={"error": exc.code, "detail": str(exc)})
        wire = report.to_wire()
        app.state.reports[payload["token"]] = wire
        click.echo(json.dumps({"verifier_report": wire}, sort_keys=True))

        issued = None
        if report.accepted:
            profile = {
                item.attribute_path.replace(".", "_"): item.value
                for item in report.disclosure.items
                if item.mode == "plain"
            }
            issued = {
                "iss": issuer_id,
                "member_profile": {
                    **profile,
                    "wallet": report.disclosure.wallet,
                    "verified_by": verifier_id,
                },
            }
            if issue_dir is not None:
                issue_dir.mkdir(parents=True, exist_ok=True)
                out_path = issue_dir / f"profile_{report.disclosure.wallet}.json"
                out_path.write_text(json.dumps(issued, indent=2, sort_keys=True))
        return {"report": wire, "issued_credential": issued}

    @app.get("/reports/{token}")
    async def get_report(token: str):
        report = app.state.reports.get(token)
        if report is None:
            return JSONResponse(status_code=404, content={"error": "token_mismatch", "detail": "unknown token"})
        return report

    return app


@main.group("verifier")
def verifier_group():
    """Demo relying party."""


@verifier_group.command("serve")
@click.option("--policy", "policy_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8520, show_default=True)
@click.option("--ledger", "ledger_path", type=click.Path(dir_okay=False), required=True, help="Bridge ledger file to read for attestation/sybil checks.")
@click.option("--issue-dir", type=click.Path(file_okay=False, path_type=Path), default=None, help="Where re-issued profile credentials are written.")
@click.pass_context
def verifier_serve(ctx, policy_path: Path, host: str, port: int, ledger_path: str, issue_dir: Optional[Path]):
    """Register a presentation configuration and serve the callback."""

    def body():
        import uvicorn

        spec = json.loads(policy_path.read_text())
        requests = [DisclosureRequest.from_wire(r) for r in spec["requests"]]
        policy = SybilPolicy(**spec.get("policy", {}))
        verifier_id = spec["verifier_id"]
        issuer_id = spec.get("issuer", f"https://{verifier_id}.verifier.local")

        with _client(ctx) as client:
            server_key = client.server_key()
            config_id = client.register_config(
                verifier_id, f"http://{host}:{port}/callback", requests
            )
        click.echo(json.dumps({"config_id": config_id, "verifier_id": verifier_id}))

        app = build_verifier_app(
            verifier_id=verifier_id,
            issuer_id=issuer_id,
            server_key=server_key,
            ledger_path=ledger_path,
            policy=policy,
            issue_dir=issue_dir,
        )
        uvicorn.run(app, host=host, port=port, log_level="warning")

    _run(ctx, body)


# -- ledger inspection ------------------------------------------------------------------

@main.group("ledger")
def ledger_group():
    """Inspect the identity-interaction ledger."""


@ledger_group.command("inspect")
@click.option("--path", "ledger_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--kind", type=click.Choice(["bridge", "presentation"]), default=None)
@click.option("--wallet-ref", default=None)
@click.pass_context
def ledger_inspect(ctx, ledger_path: str, kind: Optional[str], wallet_ref: Optional[str]):
    """Render entries with a full content-hash audit."""

    def body():
        ledger = FileLedger(ledger_path)
        try:
            count = ledger.audit()
        except LedgerAuditError as exc:
            click.echo(json.dumps({"error": exc.code, "detail": str(exc), "seq": exc.seq}), err=True)
            sys.exit(EXIT_CODES["ledger_audit_error"])
        entries = [
            e.to_wire()
            for e in ledger.all_entries()
            if (kind is None or e.kind == kind)
            and (wallet_ref is None or e.wallet_ref == wallet_ref)
        ]
        lines = [f"audit: ok ({count} entries)"]
        for e in entries:
            marker = e.get("h2", e.get("verifier_id", ""))
            lines.append(f"[{e['seq']:4}] {e['kind']:<12} t={e['timestamp']} ref={e['wallet_ref'][:12]}… {str(marker)[:24]}")
        _emit(ctx, {"audit_ok": True, "entries": entries}, lines)

    _run(ctx, body)


# -- server -------------------------------------------------------------------------------

@main.group("server")
def server_group():
    """Bridge server."""


@server_group.command("run")
@click.option("--host", default=None, help="Overrides IDBRIDGE_BIND host.")
@click.option("--port", type=int, default=None, help="Overrides IDBRIDGE_BIND port.")
def server_run(host: Optional[str], port: Optional[int]):
    """Run the bridge server (configuration via IDBRIDGE_* environment)."""
    import uvicorn

    from .server.http import app_from_env

    bind = os.environ.get("IDBRIDGE_BIND", "127.0.0.1:8420")
    bind_host, _, bind_port = bind.partition(":")
    uvicorn.run(
        app_from_env(),
        host=host or bind_host or "127.0.0.1",
        port=port or int(bind_port or 8420),
        log_level="warning",
    )


if __name__ == "__main__":
    main()
