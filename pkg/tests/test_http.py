import json

import pytest
from fastapi.testclient import TestClient

from idbridge.claims import build_payloads, encrypt_bundle, select_disclosures, sign_consent
from idbridge.crypto.predicates import Predicate
from idbridge.crypto.signing import sign
from idbridge.model import DisclosureRequest, bind_encryption_key
from idbridge.server.http import create_app
from idbridge.server.service import SESSION_LIFETIME

ISSUER = "https://registrar.unseen-university.example"


@pytest.fixture
def app(service):
    return create_app(service, enable_test_clock=True)


@pytest.fixture
def http(app):
    with TestClient(app, base_url="http://bridge.test") as client:
        yield client


def _authenticate(http, identity):
    challenge = http.post("/auth/challenge", json={"wallet": identity.address}).json()
    signature = sign(
        identity.signing_secret,
        bind_encryption_key(challenge["message"], identity.encryption_public),
    )
    response = http.post(
        "/auth/verify",
        json={
            "wallet": identity.address,
            "encryption_public": identity.encryption_public.hex(),
            "signature": signature.to_hex(),
        },
    )
    assert response.status_code == 200, response.text
    return response


def _store_diploma(http, identity, diploma_import, rng):
    bundle = build_payloads(diploma_import)
    submission = encrypt_bundle(bundle, identity.encryption_public, diploma_import.issuer, rng)
    response = http.post("/claims", json=submission.to_wire())
    assert response.status_code == 200, response.text
    return bundle, submission, response.json()


def test_challenge_then_verify_sets_httponly_cookie(http, alice):
    response = _authenticate(http, alice)
    set_cookie = response.headers["set-cookie"]
    assert "HttpOnly" in set_cookie
    assert response.json()["wallet"] == alice.address


def test_error_bodies_are_machine_parsable(http):
    response = http.post("/auth/challenge", json={"wallet": "bogus"})
    assert response.status_code == 400
    body = response.json()
    assert body["error"] == "malformed_submission"
    assert "detail" in body


def test_unauthenticated_requests_rejected(http):
    assert http.get("/claims").status_code == 401
    assert http.post("/claims", json={}).status_code == 401
    assert http.delete(f"/claims/{ISSUER}").status_code == 401


def test_full_http_bridge_flow(http, alice, diploma_import, rng):
    _authenticate(http, alice)
    bundle, submission, record = _store_diploma(http, alice, diploma_import, rng)

    listed = http.get("/claims").json()["claims"]
    assert [entry["issuer"] for entry in listed] == [ISSUER]

    from urllib.parse import quote

    fetched = http.get(f"/claims/{quote(ISSUER, safe='')}").json()
    assert fetched["h1"] == submission.h1.hex()
    assert len(fetched["ciphertexts"]) == len(bundle.payloads)

    filtered = http.get(f"/claims/{quote(ISSUER, safe='')}", params={"indices": "1,2"}).json()
    assert [d["index"] for d in filtered["descriptors"]] == [1, 2]

    deleted = http.delete(f"/claims/{quote(ISSUER, safe='')}").json()
    assert deleted == {"deleted": True}
    assert http.get(f"/claims/{quote(ISSUER, safe='')}").status_code == 404


def test_http_presentation_flow(http, alice, diploma_import, rng, deliveries):
    _authenticate(http, alice)
    bundle, _, _ = _store_diploma(http, alice, diploma_import, rng)

    requests = [
        DisclosureRequest(ISSUER, "degree", "degree.title", "plain").to_wire(),
        DisclosureRequest(ISSUER, "degree", "degree.year", "predicate", Predicate("gte", 2020)).to_wire(),
    ]
    created = http.post(
        "/presentations/configs",
        json={"verifier_id": "guild-crm", "callback_url": "http://cb.local/cb", "requests": requests},
    )
    assert created.status_code == 200
    config_id = created.json()["config_id"]

    config_wire = http.get(f"/presentations/configs/{config_id}").json()
    assert config_wire["config_id"] == config_id
    from idbridge.model import PresentationConfig

    config = PresentationConfig.from_wire(config_wire)
    disclosure = sign_consent(alice, select_disclosures(config, bundle, alice.address, rng=rng))
    submitted = http.post(f"/presentations/{config_id}", json=disclosure.to_wire())
    assert submitted.status_code == 200
    token = submitted.json()["token"]
    assert len(deliveries) == 1 and deliveries[0][1]["token"] == token


def test_http_error_statuses(http, alice, diploma_import, rng):
    _authenticate(http, alice)
    assert http.get("/claims/https%3A%2F%2Fnowhere.example").status_code == 404
    assert http.get("/presentations/configs/deadbeef").status_code == 404
    response = http.post(
        "/presentations/configs",
        json={"verifier_id": "v", "callback_url": "http://cb", "requests": []},
    )
    assert response.status_code == 400
    bad_body = http.post("/claims", content=b"{not json", headers={"content-type": "application/json"})
    assert bad_body.status_code == 400
    assert bad_body.json()["error"] == "malformed_submission"


def test_server_key_is_public(http, server_identity):
    response = http.get("/server/key")
    assert response.json() == {"verification_key": server_identity.verification_key}


def test_test_clock_endpoint_expires_sessions(http, alice):
    _authenticate(http, alice)
    assert http.get("/claims").status_code == 200
    http.post("/test/clock/advance", json={"seconds": SESSION_LIFETIME + 1})
    response = http.get("/claims")
    assert response.status_code == 401
    assert response.json()["error"] == "session_expired"


def test_replayed_verify_rejected_over_http(http, alice):
    challenge = http.post("/auth/challenge", json={"wallet": alice.address}).json()
    signature = sign(
        alice.signing_secret, bind_encryption_key(challenge["message"], alice.encryption_public)
    )
    body = {
        "wallet": alice.address,
        "encryption_public": alice.encryption_public.hex(),
        "signature": signature.to_hex(),
    }
    assert http.post("/auth/verify", json=body).status_code == 200
    replay = http.post("/auth/verify", json=body)
    assert replay.status_code == 409
    assert replay.json()["error"] == "replay_detected"
