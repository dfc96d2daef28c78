"""
Core chain data types and their canonical encodings.
"""
import hashlib
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import Tuple

from relchain.errors import DecodeError
from relchain.ledger.codec import Decoder, Encoder

DIGEST_SIZE = 32
ZERO_HASH = bytes(DIGEST_SIZE)
MAX_U64 = 2 ** 64 - 1


def sha256(data):
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class WlStatement:
    """One workload transaction: a SQL script or a CALL."""
    text: str
    client_id: str
    seq_no: int

    def __post_init__(self):
        if not self.text:
            raise ValueError("statement text must be non-empty")
        if not 0 <= self.seq_no <= MAX_U64:
            raise ValueError(f"seq_no out of range: {self.seq_no}")

    def write(self, enc):
        enc.str(self.text).str(self.client_id).u64(self.seq_no)

    @classmethod
    def read(cls, dec):
        text, client_id, seq_no = dec.str(), dec.str(), dec.u64()
        try:
            return cls(text, client_id, seq_no)
        except ValueError as e:
            raise DecodeError(str(e)) from e


@dataclass(frozen=True)
class BcTransaction:
    """The unit submitted to the network, batching one or more statements."""
    statements: Tuple[WlStatement, ...]
    nonce: int = 0

    def __post_init__(self):
        object.__setattr__(self, "statements", tuple(self.statements))
        if len(self.statements) < 1:
            raise ValueError("a bc-transaction carries at least one statement")
        if not 0 <= self.nonce <= MAX_U64:
            raise ValueError(f"nonce out of range: {self.nonce}")

    @cached_property
    def encoded(self):
        return encode_tx(self)

    @cached_property
    def tx_hash(self):
        return sha256(self.encoded)


def encode_tx(tx):
    enc = Encoder().u64(tx.nonce)
    enc.list(tx.statements, lambda e, s: s.write(e))
    return enc.getvalue()


def decode_tx(data):
    dec = Decoder(data)
    nonce = dec.u64()
    statements = dec.list(WlStatement.read)
    dec.finish()
    if not statements:
        raise DecodeError("a bc-transaction carries at least one statement")
    tx = BcTransaction(tuple(statements), nonce)
    tx.__dict__["encoded"] = bytes(data)
    return tx


class ExecCode(IntEnum):
    OK = 0
    FAILED = 1


@dataclass(frozen=True)
class ExecStatus:
    code: ExecCode = ExecCode.OK
    reason: str = ""
    result: bytes = b""

    def __post_init__(self):
        if self.code == ExecCode.FAILED and not self.reason:
            raise ValueError("failed status requires a reason")

    @classmethod
    def success(cls, result=b""):
        return cls(ExecCode.OK, "", result)

    @classmethod
    def failure(cls, reason):
        return cls(ExecCode.FAILED, reason)

    @property
    def ok(self):
        return self.code == ExecCode.OK

    def write(self, enc):
        enc.u8(int(self.code)).str(self.reason).bytes(self.result)

    @classmethod
    def read(cls, dec):
        code = dec.u8()
        if code not in (ExecCode.OK, ExecCode.FAILED):
            raise DecodeError(f"unknown status code {code}")
        reason, result = dec.str(), dec.bytes()
        try:
            return cls(ExecCode(code), reason, result)
        except ValueError as e:
            raise DecodeError(str(e)) from e


def encode_statuses(statuses):
    """Per-transaction status lists of one block."""
    enc = Encoder()
    enc.list(statuses, lambda e, tx_statuses: e.list(tx_statuses, lambda e2, s: s.write(e2)))
    return enc.getvalue()


def decode_statuses(data):
    dec = Decoder(data)
    statuses = dec.list(lambda d: d.list(ExecStatus.read))
    dec.finish()
    return statuses


@dataclass(frozen=True)
class BlockHeader:
    height: int
    prev_block_hash: bytes
    app_hash: bytes
    proposer_id: int
    block_time: int
    num_txs: int

    def write(self, enc):
        enc.u64(self.height).raw(self.prev_block_hash).raw(self.app_hash)
        enc.u32(self.proposer_id).u64(self.block_time).u32(self.num_txs)

    @classmethod
    def read(cls, dec):
        return cls(height=dec.u64(),
                   prev_block_hash=dec.raw(DIGEST_SIZE),
                   app_hash=dec.raw(DIGEST_SIZE),
                   proposer_id=dec.u32(),
                   block_time=dec.u64(),
                   num_txs=dec.u32())

    def encode(self):
        enc = Encoder()
        self.write(enc)
        return enc.getvalue()

    @classmethod
    def decode(cls, data):
        dec = Decoder(data)
        header = cls.read(dec)
        dec.finish()
        return header


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    txs: Tuple[BcTransaction, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "txs", tuple(self.txs))

    @property
    def height(self):
        return self.header.height

    @cached_property
    def encoded(self):
        enc = Encoder()
        self.header.write(enc)
        enc.list(self.txs, lambda e, tx: e.bytes(tx.encoded))
        return enc.getvalue()

    @cached_property
    def block_id(self):
        return hash_block(self)

    @property
    def size(self):
        return len(self.encoded)


def hash_block(block):
    return sha256(block.encoded)


def decode_block(data):
    dec = Decoder(data)
    header = BlockHeader.read(dec)
    txs = dec.list(lambda d: decode_tx(d.bytes()))
    dec.finish()
    block = Block(header, tuple(txs))
    block.__dict__["encoded"] = bytes(data)
    return block
