"""Single-writer append-only chain of hash-linked blocks.

Every transaction id is ``sha256(payload ‖ kind ‖ submitter)``; every
block header hashes to ``sha256(height ‖ prev_hash ‖ merkle_root ‖
timestamp)`` with fixed-width big-endian integers so the concatenation
is unambiguous. Blocks link by ``prev_hash``; the genesis block links to
32 zero bytes. There is no consensus and no mining — one authoritative
writer appends, everyone else reads.

The persisted form is JSON lines, one block per line, canonical
encoding. ``verify_chain_records`` recomputes every hash from the raw
field values, so any single flipped bit in the file surfaces as a
verification failure at that height.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path

import json

from ..canonical import canonical_json_bytes, from_hex, sha256, sha256_hex, to_hex
from ..errors import ValidationError

TRANSACTION_KINDS = frozenset(
    {"deploy_contract", "did_registration", "access_grant", "access_denial"}
)

GENESIS_PREV_HASH = to_hex(b"\x00" * 32)
_EMPTY_MERKLE = to_hex(b"\x00" * 32)


def _tx_id(payload: bytes, kind: str, submitter: str) -> str:
    return sha256_hex(payload + kind.encode() + submitter.encode())


def merkle_root(tx_ids: list[str]) -> str:
    """Ordered pairwise hash tree over transaction ids, odd leaf duplicated."""
    if not tx_ids:
        return _EMPTY_MERKLE
    level = [from_hex(t) for t in tx_ids]
    while len(level) > 1:
        if len(level) % 2 == 1:
            level.append(level[-1])
        level = [sha256(level[i] + level[i + 1]) for i in range(0, len(level), 2)]
    return to_hex(level[0])


@dataclass(frozen=True)
class Transaction:
    tx_id: str
    timestamp: int
    kind: str
    payload: bytes
    submitter: str

    def __post_init__(self) -> None:
        if self.kind not in TRANSACTION_KINDS:
            raise ValidationError(f"unknown transaction kind {self.kind!r}")
        if self.timestamp < 0:
            raise ValidationError("transaction timestamp must be non-negative")
        expected = _tx_id(self.payload, self.kind, self.submitter)
        if self.tx_id != expected:
            raise ValidationError(f"tx_id does not match payload for kind {self.kind}")

    @classmethod
    def create(cls, kind: str, payload: dict, submitter: str, timestamp: int) -> "Transaction":
        body = canonical_json_bytes(payload)
        return cls(
            tx_id=_tx_id(body, kind, submitter),
            timestamp=int(timestamp),
            kind=kind,
            payload=body,
            submitter=submitter,
        )

    def payload_dict(self) -> dict:
        return json.loads(self.payload.decode("utf-8"))

    def to_dict(self) -> dict:
        return {
            "txId": self.tx_id,
            "timestamp": self.timestamp,
            "kind": self.kind,
            "payload": to_hex(self.payload),
            "submitter": self.submitter,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Transaction":
        return cls(
            tx_id=data["txId"],
            timestamp=int(data["timestamp"]),
            kind=data["kind"],
            payload=from_hex(data["payload"]),
            submitter=data["submitter"],
        )


def _block_hash(height: int, prev_hash: str, root: str, timestamp: int) -> str:
    header = (
        height.to_bytes(8, "big")
        + from_hex(prev_hash)
        + from_hex(root)
        + timestamp.to_bytes(8, "big")
    )
    return sha256_hex(header)


@dataclass(frozen=True)
class Block:
    height: int
    prev_hash: str
    merkle_root: str
    timestamp: int
    transactions: tuple[Transaction, ...]
    hash: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "transactions", tuple(self.transactions))
        if self.height < 0:
            raise ValidationError("block height must be >= 0")
        if self.height > 0 and not self.transactions:
            raise ValidationError("only the genesis block may be empty")
        # Sealing stamps every transaction with the block time, and the block
        # time feeds the block hash; without this equality a transaction's
        # timestamp would be the one field no hash covers.
        if any(t.timestamp != self.timestamp for t in self.transactions):
            raise ValidationError("transaction timestamps must match the block timestamp")
        if merkle_root([t.tx_id for t in self.transactions]) != self.merkle_root:
            raise ValidationError(f"merkle root mismatch at height {self.height}")
        expected = _block_hash(self.height, self.prev_hash, self.merkle_root, self.timestamp)
        if self.hash != expected:
            raise ValidationError(f"block hash mismatch at height {self.height}")

    @classmethod
    def create(
        cls,
        height: int,
        prev_hash: str,
        timestamp: int,
        transactions: tuple[Transaction, ...],
    ) -> "Block":
        root = merkle_root([t.tx_id for t in transactions])
        return cls(
            height=height,
            prev_hash=prev_hash,
            merkle_root=root,
            timestamp=int(timestamp),
            transactions=tuple(transactions),
            hash=_block_hash(height, prev_hash, root, int(timestamp)),
        )

    def to_dict(self) -> dict:
        return {
            "height": self.height,
            "prevHash": self.prev_hash,
            "merkleRoot": self.merkle_root,
            "timestamp": self.timestamp,
            "transactions": [t.to_dict() for t in self.transactions],
            "hash": self.hash,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Block":
        return cls(
            height=int(data["height"]),
            prev_hash=data["prevHash"],
            merkle_root=data["merkleRoot"],
            timestamp=int(data["timestamp"]),
            transactions=tuple(Transaction.from_dict(t) for t in data["transactions"]),
            hash=data["hash"],
        )


class Chain:
    """The authoritative chain: one serialized writer, concurrent readers."""

    def __init__(self, clock=None):
        self._clock = clock or (lambda: int(time.time()))
        self._lock = threading.Lock()
        genesis = Block.create(
            height=0,
            prev_hash=GENESIS_PREV_HASH,
            timestamp=int(self._clock()),
            transactions=(),
        )
        self._blocks: list[Block] = [genesis]

    @property
    def height(self) -> int:
        return len(self._blocks) - 1

    @property
    def blocks(self) -> tuple[Block, ...]:
        return tuple(self._blocks)

    @property
    def tip(self) -> Block:
        return self._blocks[-1]

    def append_block(self, transactions: list[Transaction]) -> Block:
        """Seal the given transactions into the next block."""
        if not transactions:
            raise ValidationError("a block must carry at least one transaction")
        with self._lock:
            prev = self._blocks[-1]
            timestamp = max(int(self._clock()), prev.timestamp)
            sealed = tuple(replace(t, timestamp=timestamp) for t in transactions)
            block = Block.create(
                height=prev.height + 1,
                prev_hash=prev.hash,
                timestamp=timestamp,
                transactions=sealed,
            )
            self._blocks.append(block)
        return block

    def record(self, kind: str, payload: dict, submitter: str) -> str:
        """Convenience: seal one transaction into its own block, return tx id."""
        tx = Transaction.create(kind, payload, submitter, timestamp=int(self._clock()))
        self.append_block([tx])
        return tx.tx_id

    def transactions(self, kind: str | None = None) -> list[Transaction]:
        txs = [t for b in self._blocks for t in b.transactions]
        if kind is not None:
            txs = [t for t in txs if t.kind == kind]
        return txs

    def find_transaction(self, tx_id: str) -> Transaction | None:
        for block in self._blocks:
            for tx in block.transactions:
                if tx.tx_id == tx_id:
                    return tx
        return None

    def verify(self) -> tuple[bool, int | None]:
        return verify_chain_records([b.to_dict() for b in self._blocks])

    def write_chain(self, path: Path) -> Path:
        path = Path(path)
        with path.open("wb") as fh:
            for block in self._blocks:
                fh.write(canonical_json_bytes(block.to_dict()) + b"\n")
        return path


def verify_chain_records(records: list[dict]) -> tuple[bool, int | None]:
    """Recompute every hash in raw block dicts; (ok, first bad height).

    Works on untrusted data: any malformed field counts as invalid at the
    height where it appears, so a corrupted file never verifies.
    """
    if not records:
        return False, 0
    prev_hash = GENESIS_PREV_HASH
    for index, record in enumerate(records):
        try:
            if int(record["height"]) != index:
                return False, index
            if record["prevHash"] != prev_hash:
                return False, index
            tx_ids = []
            for tx in record["transactions"]:
                payload = from_hex(tx["payload"])
                if tx["txId"] != _tx_id(payload, tx["kind"], tx["submitter"]):
                    return False, index
                tx_ids.append(tx["txId"])
            if index > 0 and not tx_ids:
                return False, index
            times = [int(tx["timestamp"]) for tx in record["transactions"]]
            if any(t != int(record["timestamp"]) for t in times):
                return False, index
            if merkle_root(tx_ids) != record["merkleRoot"]:
                return False, index
            expected = _block_hash(
                int(record["height"]),
                record["prevHash"],
                record["merkleRoot"],
                int(record["timestamp"]),
            )
            if record["hash"] != expected:
                return False, index
            prev_hash = record["hash"]
        except (KeyError, TypeError, ValueError, ValidationError):
            return False, index
    return True, None


def verify_chain_file(path: Path) -> tuple[bool, int | None]:
    """Verify a persisted chain; parse failures count as tampering."""
    records = []
    with Path(path).open("rb") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except (json.JSONDecodeError, UnicodeDecodeError):
                return False, len(records)
    return verify_chain_records(records)


def load_chain(path: Path) -> list[Block]:
    """Parse a persisted chain into validated blocks (raises on tampering)."""
    blocks = []
    with Path(path).open() as fh:
        for line in fh:
            if line.strip():
                blocks.append(Block.from_dict(json.loads(line)))
    ok, bad = verify_chain_records([b.to_dict() for b in blocks])
    if not ok:
        raise ValidationError(f"chain file invalid at height {bad}")
    return blocks
