"""
Per-node append-only ledger.
"""
import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import List

from relchain.errors import ChainMismatch, DecodeError, NotFound
from relchain.ledger.codec import Decoder, Encoder
from relchain.ledger.types import (ZERO_HASH, Block, ExecStatus, decode_block, decode_statuses, encode_statuses,
                                   hash_block, sha256)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LedgerEntry:
    block: Block
    statuses: List[List[ExecStatus]]
    block_hash: bytes


class Ledger:
    """
    Single writer, many readers. Readers only ever see fully appended entries
    because an entry becomes visible with a single list append under the lock.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._entries = []
        self._tx_index = {}

    @property
    def height(self):
        return len(self._entries)

    @property
    def tip_hash(self):
        entries = self._entries
        return entries[-1].block_hash if entries else ZERO_HASH

    @property
    def tip(self):
        entries = self._entries
        return entries[-1] if entries else None

    def append_block(self, block, statuses):
        statuses = [list(s) for s in statuses]
        if len(statuses) != len(block.txs):
            raise ValueError(f"{len(statuses)} status lists for {len(block.txs)} transactions")
        with self._lock:
            expected_height = len(self._entries) + 1
            if block.header.height != expected_height:
                raise ChainMismatch(f"height {block.header.height} does not follow tip {expected_height - 1}")
            if block.header.prev_block_hash != self.tip_hash:
                raise ChainMismatch(f"block {block.header.height} does not reference the tip hash")
            entry = LedgerEntry(block, statuses, hash_block(block))
            for index, tx in enumerate(block.txs):
                self._tx_index[tx.tx_hash] = (block.header.height, index)
            self._entries.append(entry)
        logger.debug("appended block %d (%d txs)", block.header.height, len(block.txs))

    def get_block(self, height):
        """Return the stored (block, statuses) at height."""
        entries = self._entries
        if not 1 <= height <= len(entries):
            raise NotFound(f"no block at height {height} (tip is {len(entries)})")
        entry = entries[height - 1]
        return entry.block, entry.statuses

    def entry(self, height):
        self.get_block(height)
        return self._entries[height - 1]

    def locate_tx(self, tx_hash):
        """(height, index) of a committed transaction, or None."""
        return self._tx_index.get(tx_hash)

    def statuses_for(self, tx_hash):
        where = self.locate_tx(tx_hash)
        if where is None:
            raise NotFound(f"transaction {tx_hash.hex()} is not committed")
        height, index = where
        return self._entries[height - 1].statuses[index]

    def verify_chain(self):
        """Re-hash every block and check the links. Returns the first bad height or None."""
        prev = ZERO_HASH
        for height, entry in enumerate(list(self._entries), start=1):
            block = decode_block(entry.block.encoded)
            if block.header.height != height or block.header.prev_block_hash != prev:
                return height
            digest = hash_block(block)
            if digest != entry.block_hash:
                return height
            prev = digest
        return None

    def export(self, path):
        """
        Write the ledger file: for each block, the length-prefixed block encoding,
        the length-prefixed status encoding and a digest over both.
        """
        path = Path(path)
        with open(path, "wb") as out:
            for entry in list(self._entries):
                out.write(export_entry(entry.block.encoded, encode_statuses(entry.statuses)))
        return path

    def export_bytes(self):
        return b"".join(export_entry(e.block.encoded, encode_statuses(e.statuses)) for e in list(self._entries))


def export_entry(block_bytes, status_bytes):
    enc = Encoder().bytes(block_bytes).bytes(status_bytes).raw(sha256(block_bytes + status_bytes))
    return enc.getvalue()


def read_export(data):
    """Parse an exported ledger back into (block, statuses) pairs. Raises DecodeError on any damage."""
    dec = Decoder(data)
    entries = []
    prev = ZERO_HASH
    while dec.remaining:
        block_bytes = dec.bytes()
        status_bytes = dec.bytes()
        digest = dec.raw(32)
        if sha256(block_bytes + status_bytes) != digest:
            raise DecodeError(f"entry {len(entries) + 1} digest mismatch")
        block = decode_block(block_bytes)
        if block.header.height != len(entries) + 1 or block.header.prev_block_hash != prev:
            raise DecodeError(f"entry {len(entries) + 1} breaks the hash chain")
        prev = hash_block(block)
        entries.append((block, decode_statuses(status_bytes)))
    return entries


def verify_export(data):
    try:
        read_export(data)
    except DecodeError as e:
        logger.warning("ledger export failed verification: %s", e)
        return False
    return True
