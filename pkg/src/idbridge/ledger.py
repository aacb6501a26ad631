"""Append-only identity-interaction log with an EVM-event-shaped interface.

Two backends ship: in-memory and file-backed. The file format is one entry
per line — the canonical JSON of the entry, a tab, and the hex SHA-512 of
those canonical bytes — human-auditable and bit-exact. A real chain
adapter can implement the same interface later.
"""
from __future__ import annotations

import os
import threading
from typing import Iterable, Optional

from .errors import LedgerAuditError, LedgerError
from .model import LedgerEntry, LedgerTxRef

TimeRange = tuple[Optional[int], Optional[int]]  # inclusive bounds, None = open


class Ledger:
    """Shared append/query logic over a backend-held entry list."""

    backend_id = "abstract"

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: list[LedgerEntry] = []

    # -- writing ---------------------------------------------------------

    def append(self, entry: LedgerEntry) -> LedgerTxRef:
        """Assign the next seq and persist; timestamps must not regress."""
        with self._lock:
            if self._entries and entry.timestamp < self._entries[-1].timestamp:
                raise LedgerError(
                    f"timestamp regression: {entry.timestamp} < {self._entries[-1].timestamp}"
                )
            stored = entry.with_seq(len(self._entries) + 1)
            self._persist(stored)
            self._entries.append(stored)
            return LedgerTxRef(
                backend_id=self.backend_id, seq=stored.seq, content_hash=stored.content_hash()
            )

    def _persist(self, entry: LedgerEntry) -> None:
        pass

    # -- queries ---------------------------------------------------------

    def _snapshot(self) -> list[LedgerEntry]:
        with self._lock:
            return list(self._entries)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def all_entries(self) -> list[LedgerEntry]:
        return self._snapshot()

    def entries_for(
        self,
        wallet_ref: str,
        kind: Optional[str] = None,
        time_range: Optional[TimeRange] = None,
    ) -> list[LedgerEntry]:
        """Entries for a wallet reference in ascending seq order, optionally
        filtered by kind and inclusive [start, end] timestamp range."""
        start, end = time_range if time_range else (None, None)
        selected = []
        for entry in self._snapshot():
            if entry.wallet_ref != wallet_ref:
                continue
            if kind is not None and entry.kind != kind:
                continue
            if start is not None and entry.timestamp < start:
                continue
            if end is not None and entry.timestamp > end:
                continue
            selected.append(entry)
        return selected

    def entry_at(self, seq: int) -> Optional[LedgerEntry]:
        with self._lock:
            if 1 <= seq <= len(self._entries):
                return self._entries[seq - 1]
        return None

    def contains_h2(self, h2: bytes) -> tuple[bool, Optional[LedgerTxRef]]:
        for entry in self._snapshot():
            if entry.h2 == h2:
                ref = LedgerTxRef(
                    backend_id=self.backend_id, seq=entry.seq, content_hash=entry.content_hash()
                )
                return True, ref
        return False, None

    # -- integrity ---------------------------------------------------------

    def audit(self) -> int:
        """Re-derive every content hash and seq; returns the entry count or
        raises LedgerAuditError naming the first bad seq."""
        for position, entry in enumerate(self._snapshot(), start=1):
            if entry.seq != position:
                raise LedgerAuditError(position, f"stored seq {entry.seq} out of order")
        return len(self)


class InMemoryLedger(Ledger):
    backend_id = "memory"


class FileLedger(Ledger):
    """Newline-delimited canonical entries with per-line content hashes."""

    def __init__(self, path: str | os.PathLike):
        super().__init__()
        self.path = os.fspath(path)
        self.backend_id = f"file:{os.path.basename(self.path)}"
        if os.path.exists(self.path):
            self._entries = list(self._read_entries())

    def _persist(self, entry: LedgerEntry) -> None:
        line = entry.canonical_bytes().decode("utf-8") + "\t" + entry.content_hash() + "\n"
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(line)
            handle.flush()
            os.fsync(handle.fileno())

    def _read_entries(self) -> Iterable[LedgerEntry]:
        for seq, (entry, _line) in enumerate(self._read_lines(), start=1):
            if entry.seq != seq:
                raise LedgerError(f"ledger file seq {entry.seq} at line {seq}")
            yield entry

    def _read_lines(self):
        from .canonical import parse

        with open(self.path, "r", encoding="utf-8") as handle:
            for number, line in enumerate(handle, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    entry_json, stored_hash = line.rsplit("\t", 1)
                    entry = LedgerEntry.from_wire(parse(entry_json))
                except (ValueError, KeyError) as exc:
                    raise LedgerAuditError(number, f"unparseable line: {exc}") from exc
                yield entry, (entry_json, stored_hash)

    def audit(self) -> int:
        """Full file audit: recompute each line's hash from its canonical
        bytes and check seq ordering; detects any flipped byte."""
        from .crypto.hashing import sha512

        count = 0
        for position, (entry, (entry_json, stored_hash)) in enumerate(self._read_lines(), start=1):
            recomputed = sha512(entry_json.encode("utf-8")).hex()
            if recomputed != stored_hash:
                raise LedgerAuditError(position, "content hash mismatch")
            if entry.canonical_bytes().decode("utf-8") != entry_json:
                raise LedgerAuditError(position, "entry bytes are not canonical")
            if entry.seq != position:
                raise LedgerAuditError(position, f"stored seq {entry.seq} out of order")
            count += 1
        return count
