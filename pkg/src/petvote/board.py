"""Append-only bulletin board with hash-chained entries.

Persistence format (documented so independent checkers can verify): one entry
per line, five tab-separated fields

    seq <TAB> kind <TAB> payload <TAB> prev_hash <TAB> entry_hash

where payload is canonical JSON (sorted keys, no spaces; JSON escapes every
control character, so no raw tab or newline ever appears inside it), hashes
are lowercase hex SHA-256, and

    entry_hash = sha256(seq || 0x1e || kind || 0x1e || payload || 0x1e || prev_hash)

over the exact ASCII bytes of the fields.  The first entry has seq 0 and a
prev_hash of 64 zeros.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .canon import canonical_json

GENESIS_HASH = "0" * 64

KINDS = (
    "params",
    "key",
    "codegen-step",
    "code-table",
    "ballot",
    "pet",
    "shares",
    "finalization",
    "tally",
)


class BoardError(ValueError):
    pass


def _entry_hash(seq: int, kind: str, payload: str, prev_hash: str) -> str:
    material = b"\x1e".join(
        [str(seq).encode("ascii"), kind.encode("ascii"), payload.encode("utf-8"), prev_hash.encode("ascii")]
    )
    return hashlib.sha256(material).hexdigest()


@dataclass(frozen=True)
class BoardEntry:
    seq: int
    kind: str
    payload: str  # canonical JSON
    prev_hash: str
    entry_hash: str

    def to_line(self) -> str:
        return "\t".join([str(self.seq), self.kind, self.payload, self.prev_hash, self.entry_hash])

    @classmethod
    def from_line(cls, line: str) -> "BoardEntry":
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 5:
            raise BoardError(f"malformed board line: {line!r}")
        return cls(
            seq=int(parts[0]), kind=parts[1], payload=parts[2], prev_hash=parts[3], entry_hash=parts[4]
        )


class Board:
    """Single-writer append-only log; reads are over immutable history."""

    def __init__(self):
        self.entries: list[BoardEntry] = []

    def append(self, kind: str, payload_obj) -> BoardEntry:
        if kind not in KINDS:
            raise BoardError(f"unknown entry kind {kind!r}")
        payload = canonical_json(payload_obj)
        seq = len(self.entries)
        prev_hash = self.entries[-1].entry_hash if self.entries else GENESIS_HASH
        entry = BoardEntry(
            seq=seq,
            kind=kind,
            payload=payload,
            prev_hash=prev_hash,
            entry_hash=_entry_hash(seq, kind, payload, prev_hash),
        )
        self.entries.append(entry)
        return entry

    def read_all(self, kind: str | None = None) -> list[BoardEntry]:
        if kind is None:
            return list(self.entries)
        return [e for e in self.entries if e.kind == kind]

    def verify_chain(self) -> bool:
        prev = GENESIS_HASH
        for seq, entry in enumerate(self.entries):
            if entry.seq != seq:
                return False
            if entry.prev_hash != prev:
                return False
            if _entry_hash(entry.seq, entry.kind, entry.payload, entry.prev_hash) != entry.entry_hash:
                return False
            prev = entry.entry_hash
        return True

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self.entries:
                fh.write(entry.to_line())
                fh.write("\n")

    @classmethod
    def load(cls, path) -> "Board":
        board = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip() == "":
                    continue
                board.entries.append(BoardEntry.from_line(line))
        return board


def verify_board_file(path) -> bool:
    """Parse-and-verify; any unparseable or out-of-chain content counts as tampering."""
    try:
        board = Board.load(path)
    except (BoardError, ValueError, UnicodeDecodeError):
        return False
    return board.verify_chain()
