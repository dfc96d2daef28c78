"""
Client-facing node API. Every call may come from any thread: writes are
posted to the node's loop, queries and block fetches read committed state
directly.
"""
import logging
from concurrent.futures import Future

from relchain.node.node import AdmissionResponse, CommitResponse

logger = logging.getLogger(__name__)

__all__ = ["NodeRpc", "CommitResponse", "AdmissionResponse", "broadcast_tx_commit", "broadcast_tx_sync",
           "broadcast_tx_async", "query", "subscribe_new_block_header", "fetch_block"]


class NodeRpc:

    def __init__(self, node):
        self.node = node
        self.scheduler = node.scheduler

    def broadcast_tx_commit(self, tx):
        """
        Submit tx and block until its block is committed.

        :raises Rejected: CheckTx refused the transaction
        :raises BroadcastTimeout: not committed within broadcast_tx_commit_timeout_ms
        """
        future = Future()
        self.scheduler.call_soon_threadsafe(self.node.admit_and_watch, tx, future, self.scheduler.now())
        return self.scheduler.wait(future)

    def broadcast_tx_sync(self, tx):
        admission = self.scheduler.wait(self.scheduler.submit(self.node.admit, tx))
        return AdmissionResponse(admission.tx_hash, admission.accepted,
                                 admission.reason.value if admission.reason is not None else None)

    def broadcast_tx_async(self, tx):
        self.scheduler.call_soon_threadsafe(self.node.admit, tx)
        return tx.tx_hash

    def query(self, sql):
        """Read-only SQL against the last committed state; never forms a block."""
        return self.node.backend.query(sql)

    def subscribe_new_block_header(self):
        return self.scheduler.wait(self.scheduler.submit(self.node.subscribe))

    def unsubscribe(self, stream):
        self.scheduler.call_soon_threadsafe(self.node.unsubscribe, stream)

    def fetch_block(self, height):
        """(block, statuses) committed at height; NotFound past the tip."""
        return self.node.ledger.get_block(height)

    def status(self):
        return {"node_id": self.node.node_id, "height": self.node.ledger.height,
                "app_hash": self.node.app_hash.hex(), "mempool": self.node.mempool.size}


def broadcast_tx_commit(node, tx):
    return NodeRpc(node).broadcast_tx_commit(tx)


def broadcast_tx_sync(node, tx):
    return NodeRpc(node).broadcast_tx_sync(tx)


def broadcast_tx_async(node, tx):
    return NodeRpc(node).broadcast_tx_async(tx)


def query(node, sql):
    return NodeRpc(node).query(sql)


def subscribe_new_block_header(node):
    return NodeRpc(node).subscribe_new_block_header()


def fetch_block(node, height):
    return NodeRpc(node).fetch_block(height)
