"""
Scripted deviations for fault-injection runs. A behavior rewrites (or drops)
what a node sends to each peer; the node's own state machine stays honest.
"""
import dataclasses
import logging

from relchain.consensus.types import Proposal, Vote
from relchain.ledger.types import Block, sha256

logger = logging.getLogger(__name__)

SILENT = "silent"
EQUIVOCATE_PROPOSAL = "equivocate_proposal"
CONFLICTING_VOTES = "conflicting_votes"
BEHAVIORS = (SILENT, EQUIVOCATE_PROPOSAL, CONFLICTING_VOTES)


def _second_half(peer, peers):
    return peers.index(peer) >= len(peers) // 2


def _twin_block(block):
    header = dataclasses.replace(block.header, block_time=block.header.block_time + 1)
    return Block(header, block.txs)


def outbound(behavior, msg, peer, peers):
    """Message a byzantine node actually sends to peer, or None to send nothing."""
    if behavior == SILENT:
        return None
    if behavior == EQUIVOCATE_PROPOSAL and isinstance(msg, Proposal) and _second_half(peer, peers):
        return dataclasses.replace(msg, block=_twin_block(msg.block))
    if behavior == CONFLICTING_VOTES and isinstance(msg, Vote) and _second_half(peer, peers):
        if msg.block_id is None:
            fake = sha256(b"conflict" + msg.height.to_bytes(8, "big") + msg.round.to_bytes(4, "big"))
            return dataclasses.replace(msg, block_id=fake)
        return dataclasses.replace(msg, block_id=None)
    return msg
