"""Canonical byte encoding for every hash and signature in the system.

The rules (normative, see README "Canonical encoding"):

* JSON surface syntax, UTF-8, no insignificant whitespace.
* Map keys must be strings; they are emitted sorted by Unicode code point.
* Booleans are ``true``/``false``; integers in base 10 with no leading
  zeros; floats with an integral value are emitted as integers, all other
  finite floats use Python's shortest round-trip representation.
* ``null``, NaN and infinities have no canonical form and are rejected.

``canonicalize(parse(canonicalize(s))) == canonicalize(s)`` for every
admissible structure ``s``.
"""
from __future__ import annotations

import json
import math
from typing import Any


class CanonicalizationError(ValueError):
    """Value has no canonical representation."""


def canonicalize(structure: Any) -> bytes:
    """Encode a nested structure of strings, numbers, booleans, lists and
    string-keyed maps into deterministic canonical bytes."""
    return _render(structure).encode("utf-8")


def parse(data: bytes | str) -> Any:
    """Inverse of :func:`canonicalize` (accepts any JSON, not only the
    canonical form)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return json.loads(data)


def _render(value: Any) -> str:
    # bool first: bool is a subclass of int.
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            raise CanonicalizationError("NaN and infinities are not representable")
        if value == int(value) and abs(value) < 2**53:
            return str(int(value))
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_render(item) for item in value) + "]"
    if isinstance(value, dict):
        parts = []
        for key in sorted(value):
            if not isinstance(key, str):
                raise CanonicalizationError(f"map keys must be strings, got {type(key).__name__}")
            parts.append(json.dumps(key, ensure_ascii=False) + ":" + _render(value[key]))
        return "{" + ",".join(parts) + "}"
    raise CanonicalizationError(f"no canonical form for {type(value).__name__}")
