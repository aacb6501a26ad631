"""idbridge: a privacy-preserving bridge that carries credentials of
centralised (OIDC/OAuth) provenance to a pseudonymous wallet identity.

The holder encrypts everything client-side; the server stores ciphertexts,
signs attestations over commitments, and logs interactions on an
append-only ledger; relying parties verify consent, attestation,
and sybil-resistance signals through the verifier library.
"""

from .canonical import canonicalize, parse
from .claims import (
    BridgeSubmission,
    PayloadDescriptor,
    build_payloads,
    encrypt_bundle,
    parse_import,
    select_disclosures,
    sign_consent,
)
from .errors import ProtocolError
from .ledger import FileLedger, InMemoryLedger, Ledger
from .model import (
    Attribute,
    BlindedValue,
    BridgeRecord,
    Claim,
    CredentialImport,
    DisclosedItem,
    DisclosureRequest,
    DisclosureSet,
    LedgerEntry,
    LedgerTxRef,
    Payload,
    PayloadBundle,
    PresentationConfig,
    WalletIdentity,
    derive_address,
    wallet_ref_for,
)
from .verifier import (
    SybilPolicy,
    SybilReport,
    VerifiedPresentation,
    build_config,
    receive_presentation,
    sybil_score,
    verify_attestation,
    verify_blinded,
    verify_consent,
)

__version__ = "0.1.0"

__all__ = [
    "Attribute",
    "BlindedValue",
    "BridgeRecord",
    "BridgeSubmission",
    "Claim",
    "CredentialImport",
    "DisclosedItem",
    "DisclosureRequest",
    "DisclosureSet",
    "FileLedger",
    "InMemoryLedger",
    "Ledger",
    "LedgerEntry",
    "LedgerTxRef",
    "Payload",
    "PayloadBundle",
    "PayloadDescriptor",
    "PresentationConfig",
    "ProtocolError",
    "SybilPolicy",
    "SybilReport",
    "VerifiedPresentation",
    "WalletIdentity",
    "build_config",
    "build_payloads",
    "canonicalize",
    "derive_address",
    "encrypt_bundle",
    "parse",
    "parse_import",
    "receive_presentation",
    "select_disclosures",
    "sign_consent",
    "sybil_score",
    "verify_attestation",
    "verify_blinded",
    "verify_consent",
    "wallet_ref_for",
]
