"""
Per-node pool of pending bc-transactions with FIFO reaping and lazy gossip.
"""
import itertools
import logging
import threading
from collections import OrderedDict, deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from relchain.errors import DecodeError
from relchain.ledger.types import BcTransaction, decode_tx, sha256
from relchain.mempool.messages import HaveTxs, TxBatch, WantTxs

logger = logging.getLogger(__name__)


class RejectReason(str, Enum):
    POOL_FULL = "PoolFull"
    DUPLICATE = "Duplicate"
    MALFORMED = "Malformed"
    TOO_LARGE = "TooLarge"
    APP_REJECTED = "AppRejected"


@dataclass(frozen=True)
class Admission:
    tx_hash: bytes
    accepted: bool
    reason: Optional[RejectReason] = None
    detail: str = ""


@dataclass(frozen=True)
class PoolEntry:
    tx: BcTransaction
    tx_hash: bytes
    arrival_seq: int
    size: int


class Mempool:
    """
    All methods are safe to call from several threads.

    :param config: MempoolConfig
    :param peers: ids of the nodes this pool gossips with
    :param app_check: optional callable(tx_bytes) -> CheckResult run after the encoding checks
    :param locate_committed: optional callable(tx_hash) -> location or None, the ledger's tx index.
        Committed hashes older than the `cache_size` most recent are only found through it.
    """

    def __init__(self, config, peers=(), app_check=None, locate_committed=None):
        self.config = config
        self.peers = tuple(peers)
        self._app_check = app_check
        self._locate_committed = locate_committed
        self._lock = threading.Lock()
        self._arrivals = itertools.count()
        self._entries = {}
        self._committed = OrderedDict()
        self._announce = {peer: deque() for peer in self.peers}
        self._known = {peer: set() for peer in self.peers}
        self._requested = {}

    def __len__(self):
        return len(self._entries)

    def __contains__(self, tx_hash):
        return tx_hash in self._entries

    @property
    def size(self):
        return len(self._entries)

    def check_tx(self, tx, source=None):
        """Admit a transaction (BcTransaction or its encoded bytes)."""
        raw = tx.encoded if isinstance(tx, BcTransaction) else bytes(tx)
        tx_hash = tx.tx_hash if isinstance(tx, BcTransaction) else sha256(raw)
        with self._lock:
            admission = self._admit(raw, tx_hash, tx if isinstance(tx, BcTransaction) else None, source)
        if not admission.accepted:
            logger.debug("rejected tx %s: %s %s", tx_hash.hex()[:12], admission.reason.value, admission.detail)
        return admission

    def _admit(self, raw, tx_hash, tx, source):
        if len(raw) > self.config.max_tx_bytes:
            return Admission(tx_hash, False, RejectReason.TOO_LARGE, f"{len(raw)} > {self.config.max_tx_bytes} bytes")
        if tx_hash in self._entries or self._is_committed(tx_hash):
            return Admission(tx_hash, False, RejectReason.DUPLICATE)
        if len(self._entries) >= self.config.capacity:
            return Admission(tx_hash, False, RejectReason.POOL_FULL, f"capacity {self.config.capacity}")
        if tx is None:
            try:
                tx = decode_tx(raw)
            except DecodeError as e:
                return Admission(tx_hash, False, RejectReason.MALFORMED, str(e))
        if self._app_check is not None:
            result = self._app_check(raw)
            if not result.ok:
                return Admission(tx_hash, False, RejectReason.APP_REJECTED, result.reason)
        self._entries[tx_hash] = PoolEntry(tx, tx_hash, next(self._arrivals), len(raw))
        self._requested.pop(tx_hash, None)
        for peer in self.peers:
            if peer == source:
                self._known[peer].add(tx_hash)
            elif tx_hash not in self._known[peer]:
                self._announce[peer].append(tx_hash)
        return Admission(tx_hash, True)

    def reap(self, max_bytes, per_tx_overhead=0):
        """FIFO prefix of the pool fitting into max_bytes. The pool is left unchanged."""
        picked = []
        total = 0
        with self._lock:
            for entry in self._entries.values():
                total += entry.size + per_tx_overhead
                if total > max_bytes:
                    break
                picked.append(entry.tx)
        return picked

    def update_committed(self, txs):
        with self._lock:
            for tx in txs:
                self._entries.pop(tx.tx_hash, None)
                self._requested.pop(tx.tx_hash, None)
                self._remember_committed(tx.tx_hash)
                for known in self._known.values():
                    known.discard(tx.tx_hash)

    def _remember_committed(self, tx_hash):
        if self.config.cache_size == 0:
            return
        self._committed[tx_hash] = None
        self._committed.move_to_end(tx_hash)
        while len(self._committed) > self.config.cache_size:
            self._committed.popitem(last=False)

    def _is_committed(self, tx_hash):
        if tx_hash in self._committed:
            self._committed.move_to_end(tx_hash)
            return True
        return self._locate_committed is not None and self._locate_committed(tx_hash) is not None

    # gossip

    @property
    def has_gossip_work(self):
        with self._lock:
            return any(self._announce.values())

    def gossip_tick(self):
        """Announce up to `gossip_batch` new hashes to every peer; returns [(peer, message)]."""
        sends = []
        with self._lock:
            for peer in self.peers:
                queue, known = self._announce[peer], self._known[peer]
                batch = []
                while queue and len(batch) < self.config.gossip_batch:
                    tx_hash = queue.popleft()
                    if tx_hash in self._entries and tx_hash not in known:
                        known.add(tx_hash)
                        batch.append(tx_hash)
                if batch:
                    sends.append((peer, HaveTxs(tuple(batch))))
        return sends

    def on_gossip(self, peer, msg):
        """Handle a gossip message from peer; returns the replies as [(peer, message)]."""
        if isinstance(msg, TxBatch):
            for raw in msg.txs:
                self.check_tx(raw, source=peer)
            return []
        with self._lock:
            known = self._known.setdefault(peer, set())
            if isinstance(msg, HaveTxs):
                wanted = []
                for tx_hash in msg.hashes:
                    if self._is_committed(tx_hash):
                        continue
                    known.add(tx_hash)
                    if tx_hash in self._entries or tx_hash in self._requested:
                        continue
                    self._requested[tx_hash] = peer
                    wanted.append(tx_hash)
                return [(peer, WantTxs(tuple(wanted)))] if wanted else []
            if isinstance(msg, WantTxs):
                txs = []
                for tx_hash in msg.hashes:
                    entry = self._entries.get(tx_hash)
                    if entry is not None:
                        known.add(tx_hash)
                        txs.append(entry.tx.encoded)
                return [(peer, TxBatch(tuple(txs)))] if txs else []
        raise TypeError(f"not a mempool message: {msg!r}")
