"""
Consensus wire messages. Every message kind carries height and round (or the
height it asks about) so traces can be read without decoding blocks.
"""
from dataclasses import dataclass
from typing import Tuple

from relchain.consensus.types import Proposal, Vote, VoteKind
from relchain.errors import DecodeError
from relchain.ledger.codec import Decoder, Encoder
from relchain.ledger.types import DIGEST_SIZE, Block, decode_block

PROPOSAL = "proposal"
PREVOTE = "prevote"
PRECOMMIT = "precommit"
BLOCK_REQUEST = "block_request"
BLOCK_RESPONSE = "block_response"
SYNC_REQUEST = "sync_request"
SYNC_RESPONSE = "sync_response"

VOTE_KINDS = {VoteKind.PREVOTE: PREVOTE, VoteKind.PRECOMMIT: PRECOMMIT}


@dataclass(frozen=True)
class BlockRequest:
    """Ask for a block a precommit quorum decided but this node never received."""
    height: int
    round: int
    block_id: bytes


@dataclass(frozen=True)
class BlockResponse:
    block: Block


@dataclass(frozen=True)
class SyncRequest:
    """Ask a peer for every committed block from `height` on."""
    height: int


@dataclass(frozen=True)
class CommittedBlock:
    block: Block
    round: int
    commit: Tuple[Vote, ...]


@dataclass(frozen=True)
class SyncResponse:
    blocks: Tuple[CommittedBlock, ...]


def message_kind(msg):
    if isinstance(msg, Proposal):
        return PROPOSAL
    if isinstance(msg, Vote):
        return VOTE_KINDS[msg.kind]
    if isinstance(msg, BlockRequest):
        return BLOCK_REQUEST
    if isinstance(msg, BlockResponse):
        return BLOCK_RESPONSE
    if isinstance(msg, SyncRequest):
        return SYNC_REQUEST
    if isinstance(msg, SyncResponse):
        return SYNC_RESPONSE
    raise TypeError(f"not a consensus message: {msg!r}")


def _write_vote(enc, vote):
    enc.u8(int(vote.kind)).u64(vote.height).u32(vote.round)
    enc.boolean(vote.block_id is not None)
    if vote.block_id is not None:
        enc.raw(vote.block_id)
    enc.u32(vote.voter_id)


def _read_vote(dec):
    kind = dec.u8()
    if kind not in (VoteKind.PREVOTE, VoteKind.PRECOMMIT):
        raise DecodeError(f"unknown vote kind {kind}")
    height, round_ = dec.u64(), dec.u32()
    block_id = dec.raw(DIGEST_SIZE) if dec.boolean() else None
    return Vote(VoteKind(kind), height, round_, block_id, dec.u32())


def encode_message(msg):
    enc = Encoder()
    if isinstance(msg, Proposal):
        enc.u64(msg.height).u32(msg.round).i64(msg.valid_round).u32(msg.proposer_id).bytes(msg.block.encoded)
    elif isinstance(msg, Vote):
        _write_vote(enc, msg)
    elif isinstance(msg, BlockRequest):
        enc.u64(msg.height).u32(msg.round).raw(msg.block_id)
    elif isinstance(msg, BlockResponse):
        enc.bytes(msg.block.encoded)
    elif isinstance(msg, SyncRequest):
        enc.u64(msg.height)
    elif isinstance(msg, SyncResponse):
        def write_committed(e, item):
            e.bytes(item.block.encoded).u32(item.round).list(item.commit, _write_vote)
        enc.list(msg.blocks, write_committed)
    else:
        raise TypeError(f"not a consensus message: {msg!r}")
    return enc.getvalue()


def decode_message(kind, payload):
    dec = Decoder(payload)
    if kind == PROPOSAL:
        height, round_, valid_round, proposer = dec.u64(), dec.u32(), dec.i64(), dec.u32()
        msg = Proposal(height, round_, decode_block(dec.bytes()), proposer, valid_round)
    elif kind in (PREVOTE, PRECOMMIT):
        msg = _read_vote(dec)
        if VOTE_KINDS[msg.kind] != kind:
            raise DecodeError(f"{kind} message carries a {msg.kind.name.lower()}")
    elif kind == BLOCK_REQUEST:
        msg = BlockRequest(dec.u64(), dec.u32(), dec.raw(DIGEST_SIZE))
    elif kind == BLOCK_RESPONSE:
        msg = BlockResponse(decode_block(dec.bytes()))
    elif kind == SYNC_REQUEST:
        msg = SyncRequest(dec.u64())
    elif kind == SYNC_RESPONSE:
        msg = SyncResponse(tuple(dec.list(
            lambda d: CommittedBlock(decode_block(d.bytes()), d.u32(), tuple(d.list(_read_vote))))))
    else:
        raise DecodeError(f"unknown consensus message kind {kind}")
    dec.finish()
    return msg
