from __future__ import annotations

import json
from pathlib import Path

import pytest

from idbridge.claims import build_payloads, encrypt_bundle, parse_import
from idbridge.crypto.rng import SeededRandomness
from idbridge.crypto.signing import sign
from idbridge.ledger import InMemoryLedger
from idbridge.model import WalletIdentity, bind_encryption_key
from idbridge.server import BridgeService, ManualClock, ServerIdentity

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

CLOCK_START = 1_700_000_000


@pytest.fixture(scope="session")
def alice():
    return WalletIdentity.generate(SeededRandomness("alice"))


@pytest.fixture(scope="session")
def mallory():
    return WalletIdentity.generate(SeededRandomness("mallory"))


@pytest.fixture(scope="session")
def server_identity():
    return ServerIdentity.generate(SeededRandomness("server"))


@pytest.fixture
def rng():
    return SeededRandomness("test-rng")


@pytest.fixture
def clock():
    return ManualClock(CLOCK_START)


@pytest.fixture
def deliveries():
    return []


@pytest.fixture
def ledger():
    return InMemoryLedger()


@pytest.fixture
def service(server_identity, ledger, clock, deliveries, tmp_path):
    return BridgeService(
        server_identity,
        ledger,
        clock=clock,
        rng=SeededRandomness("service-rng"),
        store_path=str(tmp_path / "store.json"),
        deliver=lambda url, payload: deliveries.append((url, payload)),
    )


@pytest.fixture
def open_session(service):
    def _open(identity: WalletIdentity):
        _nonce, message = service.create_challenge(identity.address)
        signature = sign(
            identity.signing_secret, bind_encryption_key(message, identity.encryption_public)
        )
        return service.verify_auth(identity.address, identity.encryption_public, signature)

    return _open


@pytest.fixture
def diploma_bytes():
    return (FIXTURES / "demo_diploma.json").read_bytes()


@pytest.fixture
def diploma_import(diploma_bytes):
    return parse_import(diploma_bytes, "oidc-json")


@pytest.fixture
def bridge_diploma(service, open_session, diploma_import, rng, alice):
    """Parse + encrypt + authenticate + store the demo diploma; returns
    (session, bundle, submission, record)."""

    def _bridge(identity=None):
        identity = identity or alice
        session = open_session(identity)
        bundle = build_payloads(diploma_import)
        submission = encrypt_bundle(bundle, identity.encryption_public, diploma_import.issuer, rng)
        record = service.store_claims(session, submission)
        return session, bundle, submission, record

    return _bridge


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" in nodeid and getattr(report, "when", "") == "call":
                lines.append((nodeid.split("::")[-1], "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
