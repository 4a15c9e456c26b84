"""Append-only event journal with full-state replay.

One JSON object per line. Every state change is appended before the
caller acknowledges it, and rebuilding a deployment is a fold of the
event list over a fresh state — which keeps conservation audits and
crash-recovery testing trivial compared to a database dependency.

A journal that fails to parse refuses service: the reader reports the
byte offset of the first bad record instead of guessing.
"""

from __future__ import annotations

import json
import os
from typing import Iterator

from .errors import JournalCorruptError


def read_events(path: str) -> Iterator[dict]:
    """Yield events in order; raise JournalCorruptError at the first bad line."""
    offset = 0
    with open(path, "rb") as fh:
        for raw in fh:
            line = raw.strip()
            if line:
                try:
                    event = json.loads(line.decode("utf-8"))
                except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                    raise JournalCorruptError(path, offset, str(exc)) from None
                if not isinstance(event, dict) or "type" not in event:
                    raise JournalCorruptError(path, offset, "event is not an object with a type")
                yield event
            offset += len(raw)


class Journal:
    """Writer handle; the directory must exist and be writable."""

    def __init__(self, path: str):
        self.path = path
        self._fh = open(path, "ab")

    def append(self, event: dict) -> None:
        line = json.dumps(event, separators=(",", ":"), sort_keys=True).encode("utf-8")
        self._fh.write(line + b"\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "Journal":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
