"""
A validator node: mempool, consensus engine, ledger and an ABCI backend
wired to the simulated network.

Everything except RPC queries and ledger reads runs on the scheduler's loop,
so node state is only ever touched by one thread.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from relchain.abci.calls import call_begin_block, call_commit, call_deliver_tx, call_end_block
from relchain.consensus import byzantine
from relchain.consensus.messages import (BLOCK_REQUEST, BLOCK_RESPONSE, PRECOMMIT, PREVOTE, PROPOSAL, SYNC_REQUEST,
                                         SYNC_RESPONSE, BlockRequest, BlockResponse, CommittedBlock, SyncRequest,
                                         SyncResponse, message_kind)
from relchain.consensus.messages import decode_message as decode_consensus
from relchain.consensus.messages import encode_message as encode_consensus
from relchain.consensus.polka import Broadcast, ConsensusEngine, Decide, RequestSync, ScheduleTimeout, SendTo
from relchain.consensus.types import VoteKind
from relchain.errors import BroadcastTimeout, DecodeError, FatalNodeError, Rejected, RelchainError
from relchain.ledger.codec import Encoder
from relchain.ledger.store import Ledger
from relchain.ledger.types import Block, BlockHeader, ExecStatus
from relchain.mempool import messages as mempool_messages
from relchain.mempool.mempool import Mempool
from relchain.node.events import EventStream, NewBlockHeaderEvent

logger = logging.getLogger(__name__)

CONSENSUS_KINDS = (PROPOSAL, PREVOTE, PRECOMMIT, BLOCK_REQUEST, BLOCK_RESPONSE, SYNC_REQUEST, SYNC_RESPONSE)
MEMPOOL_KINDS = (mempool_messages.HAVE, mempool_messages.WANT, mempool_messages.TXS)
# length prefix of every tx inside an encoded block
TX_OVERHEAD = 4


@dataclass(frozen=True)
class CommitResponse:
    tx_hash: bytes
    height: int
    statuses: Tuple[ExecStatus, ...]
    elapsed_ms: float


@dataclass(frozen=True)
class AdmissionResponse:
    tx_hash: bytes
    accepted: bool
    reason: Optional[str] = None


def _header_size():
    enc = Encoder()
    BlockHeader(0, bytes(32), bytes(32), 0, 0, 0).write(enc)
    enc.u32(0)
    return len(enc.getvalue())


HEADER_OVERHEAD = _header_size()


class Node:
    """
    :param node_id: validator id
    :param vset: ValidatorSet of the network
    :param config: NodeConfig
    :param backend: AbciBackend (builtin or socket proxy)
    :param scheduler: shared Scheduler
    :param bus: message Bus the node sends through
    """

    def __init__(self, node_id, vset, config, backend, scheduler, bus):
        self.node_id = node_id
        self.vset = vset
        self.config = config
        self.backend = backend
        self.scheduler = scheduler
        self.bus = bus
        self.peers = tuple(i for i in vset.ids if i != node_id)
        self.ledger = Ledger()
        self.mempool = Mempool(config.mempool, peers=self.peers, app_check=backend.check_tx,
                               locate_committed=self.ledger.locate_tx)
        self.engine = ConsensusEngine(node_id, vset, config.timeouts, app=self,
                                      create_empty_blocks=config.create_empty_blocks,
                                      trace=config.trace_consensus)
        self.app_hash = backend.info().app_hash
        self.crashed = False
        self.behavior = None
        self.decided_rounds = {}
        self.on_commit = None
        self._certificates = {}
        self._subscribers = []
        self._commit_waiters = {}
        self._timers = []
        self._gossip_armed = False
        self._started = False

    def __repr__(self):
        return f"Node({self.node_id}, height={self.ledger.height})"

    @property
    def height(self):
        return self.ledger.height

    def start(self):
        """Enter height 1. Runs on the loop."""
        self._started = True
        self._run_effects(self.engine.start_height(self.ledger.height + 1))

    # application hooks for the consensus engine

    def has_txs(self):
        return self.mempool.size > 0

    def build_block(self, height, round_):
        max_tx_bytes = self.config.max_block_bytes - HEADER_OVERHEAD
        txs = self.mempool.reap(max_tx_bytes, per_tx_overhead=TX_OVERHEAD)
        if not txs and not self.config.create_empty_blocks:
            return None
        tip = self.ledger.tip
        prev_time = tip.block.header.block_time if tip is not None else 0
        header = BlockHeader(height=height,
                             prev_block_hash=self.ledger.tip_hash,
                             app_hash=self.app_hash,
                             proposer_id=self.node_id,
                             block_time=max(int(self.scheduler.now()), prev_time),
                             num_txs=len(txs))
        return Block(header, tuple(txs))

    def validate_block(self, block):
        header = block.header
        tip = self.ledger.tip
        checks = (
            (header.height == self.ledger.height + 1, "height"),
            (header.prev_block_hash == self.ledger.tip_hash, "prev_block_hash"),
            (header.app_hash == self.app_hash, "app_hash"),
            (header.num_txs == len(block.txs), "num_txs"),
            (header.num_txs > 0 or self.config.create_empty_blocks, "empty block"),
            (block.size <= self.config.max_block_bytes, "size"),
            (tip is None or header.block_time >= tip.block.header.block_time, "block_time"),
            (header.proposer_id in self.vset, "proposer"),
        )
        for ok, what in checks:
            if not ok:
                logger.info("node %d: block %d fails the %s check", self.node_id, header.height, what)
                return False
        return True

    # effects

    def _run_effects(self, effects):
        for effect in effects:
            if isinstance(effect, Broadcast):
                for peer in self.peers:
                    self._send_consensus(peer, effect.msg)
            elif isinstance(effect, SendTo):
                self._send_consensus(effect.peer, effect.msg)
            elif isinstance(effect, ScheduleTimeout):
                self._timers.append(self.scheduler.call_later(effect.delay_ms, self._on_timeout, effect.timeout))
            elif isinstance(effect, Decide):
                self.on_decide(effect.block, effect.round, effect.commit)
            elif isinstance(effect, RequestSync):
                self._send_consensus(effect.peer, SyncRequest(effect.height))

    def _send_consensus(self, peer, msg):
        if self.behavior is not None:
            msg = byzantine.outbound(self.behavior, msg, peer, self.peers)
            if msg is None:
                return
        self.bus.send(self.node_id, peer, message_kind(msg), encode_consensus(msg))

    def _on_timeout(self, timeout):
        if self.crashed:
            return
        self._run_effects(self.engine.on_timeout(timeout))

    # inbound

    def deliver(self, sender, kind, payload):
        """Entry point of the bus. Runs on the loop."""
        if self.crashed:
            return
        try:
            if kind in MEMPOOL_KINDS:
                self._on_gossip(sender, mempool_messages.decode_message(kind, payload))
            elif kind in CONSENSUS_KINDS:
                self._on_consensus(sender, decode_consensus(kind, payload))
            else:
                logger.warning("node %d: unknown message kind %s from %d", self.node_id, kind, sender)
        except DecodeError as e:
            logger.warning("node %d: undecodable %s from %d: %s", self.node_id, kind, sender, e)

    def _on_consensus(self, sender, msg):
        if isinstance(msg, BlockRequest):
            block = self.engine.block_for(msg.block_id)
            if block is None and 1 <= msg.height <= self.ledger.height:
                block, _ = self.ledger.get_block(msg.height)
            if block is not None and block.block_id == msg.block_id:
                self._send_consensus(sender, BlockResponse(block))
        elif isinstance(msg, SyncRequest):
            self._on_sync_request(sender, msg)
        elif isinstance(msg, SyncResponse):
            self._on_sync_response(sender, msg)
        else:
            self._run_effects(self.engine.on_message(msg, sender))

    def _on_gossip(self, sender, msg):
        before = self.mempool.size
        for peer, reply in self.mempool.on_gossip(sender, msg):
            self.bus.send(self.node_id, peer, reply.kind, mempool_messages.encode_message(reply))
        if self.mempool.size > before:
            self._txs_arrived()

    def _txs_arrived(self):
        self._arm_gossip()
        if self._started:
            self._run_effects(self.engine.on_txs_available())

    # gossip

    def _arm_gossip(self):
        if self._gossip_armed or not self.peers or not self.mempool.has_gossip_work:
            return
        self._gossip_armed = True
        self.scheduler.call_later(self.config.mempool.gossip_interval_ms, self._gossip)

    def _gossip(self):
        self._gossip_armed = False
        if self.crashed:
            return
        for peer, msg in self.mempool.gossip_tick():
            self.bus.send(self.node_id, peer, msg.kind, mempool_messages.encode_message(msg))
        self._arm_gossip()

    # transactions from clients

    def admit(self, tx):
        """CheckTx a client transaction. Runs on the loop."""
        admission = self.mempool.check_tx(tx)
        if admission.accepted:
            self._txs_arrived()
        return admission

    def admit_and_watch(self, tx, future, started_at):
        """Admit tx and resolve future with its CommitResponse once committed.

        The waiter is registered first: a single validator can commit the tx
        inside ``admit``.
        """
        entry = (future, started_at)
        self._commit_waiters.setdefault(tx.tx_hash, []).append(entry)
        admission = self.admit(tx)
        if not admission.accepted:
            waiters = self._commit_waiters.get(tx.tx_hash, [])
            if entry in waiters:
                waiters.remove(entry)
            if not waiters:
                self._commit_waiters.pop(tx.tx_hash, None)
            future.set_exception(Rejected(admission.reason.value, admission.tx_hash))
            return
        if future.done():
            return
        self.scheduler.call_later(self.config.broadcast_tx_commit_timeout_ms, self._expire_waiter, tx.tx_hash, future)

    def _expire_waiter(self, tx_hash, future):
        waiters = self._commit_waiters.get(tx_hash, [])
        for entry in list(waiters):
            if entry[0] is future:
                waiters.remove(entry)
                if not future.done():
                    future.set_exception(BroadcastTimeout(
                        f"tx {tx_hash.hex()[:12]} not committed within "
                        f"{self.config.broadcast_tx_commit_timeout_ms:.0f} ms"))
        if not waiters:
            self._commit_waiters.pop(tx_hash, None)

    # committing

    def _execute(self, block):
        try:
            handle = call_begin_block(self.backend, block.header)
            statuses = [call_deliver_tx(self.backend, handle, tx) for tx in block.txs]
            call_end_block(self.backend, handle)
            app_hash = call_commit(self.backend, handle, [s for tx_statuses in statuses for s in tx_statuses])
        except RelchainError as e:
            logger.critical("node %d: backend failed on block %d: %s", self.node_id, block.header.height, e)
            raise FatalNodeError(f"node {self.node_id} halted at height {block.header.height}: {e}") from e
        return statuses, app_hash

    def _apply(self, block, round_, commit):
        statuses, app_hash = self._execute(block)
        self.ledger.append_block(block, statuses)
        self.app_hash = app_hash
        height = block.header.height
        self._certificates[height] = CommittedBlock(block, round_, tuple(commit))
        self.decided_rounds[height] = round_
        self.mempool.update_committed(block.txs)
        logger.info("node %d: committed block %d (round %d, %d txs)", self.node_id, height, round_, len(block.txs))
        event = NewBlockHeaderEvent(block.header, block.block_id)
        for stream in list(self._subscribers):
            stream.publish(event)
        now = self.scheduler.now()
        for index, tx in enumerate(block.txs):
            for future, started_at in self._commit_waiters.pop(tx.tx_hash, []):
                if not future.done():
                    future.set_result(CommitResponse(tx.tx_hash, height, tuple(statuses[index]), now - started_at))
        if self.on_commit is not None:
            self.on_commit(self, height)

    def on_decide(self, block, round_, commit):
        self._apply(block, round_, commit)
        self.scheduler.call_later(self.config.timeouts.commit, self._next_height, block.header.height + 1)

    def _next_height(self, height):
        if self.crashed or self.ledger.height + 1 != height or self.engine.height >= height:
            return
        self._enter_height(height)

    def _enter_height(self, height):
        for timer in self._timers:
            timer.cancel()
        self._timers = []
        self._run_effects(self.engine.start_height(height))

    # block sync

    def _on_sync_request(self, sender, msg):
        blocks = tuple(self._certificates[h] for h in range(max(msg.height, 1), self.ledger.height + 1))
        if blocks:
            self._send_consensus(sender, SyncResponse(blocks))

    def _certified(self, item):
        block_id = item.block.block_id
        voters = {}
        for vote in item.commit:
            if vote.kind == VoteKind.PRECOMMIT and vote.height == item.block.header.height \
                    and vote.round == item.round and vote.block_id == block_id and vote.voter_id in self.vset:
                voters[vote.voter_id] = vote
        return len(voters) >= self.vset.quorum

    def _on_sync_response(self, sender, msg):
        applied = False
        for item in msg.blocks:
            if item.block.header.height <= self.ledger.height:
                continue
            if not self._certified(item) or not self.validate_block(item.block):
                logger.warning("node %d: rejected synced block %d from %d", self.node_id,
                               item.block.header.height, sender)
                break
            self.engine.mark_decided()
            self._apply(item.block, item.round, item.commit)
            applied = True
        if applied:
            logger.info("node %d: caught up to height %d from node %d", self.node_id, self.ledger.height, sender)
            self._enter_height(self.ledger.height + 1)

    # faults

    def crash(self):
        if not self.crashed:
            logger.info("node %d: crashed at height %d", self.node_id, self.ledger.height)
        self.crashed = True

    def recover(self):
        """Come back after a crash and ask every peer for the blocks missed meanwhile."""
        if not self.crashed:
            return
        self.crashed = False
        logger.info("node %d: recovered at height %d", self.node_id, self.ledger.height)
        for peer in self.peers:
            self._send_consensus(peer, SyncRequest(self.ledger.height + 1))
        if self._started:
            if self.engine.height <= self.ledger.height:
                self._enter_height(self.ledger.height + 1)
            else:
                self._run_effects(self.engine.restart_round())
        self._arm_gossip()

    # subscriptions

    def subscribe(self):
        stream = EventStream(self.scheduler, self.config.event_buffer)
        self._subscribers.append(stream)
        return stream

    def unsubscribe(self, stream):
        if stream in self._subscribers:
            self._subscribers.remove(stream)
        stream.close()

    def close(self):
        for stream in list(self._subscribers):
            self.unsubscribe(stream)
