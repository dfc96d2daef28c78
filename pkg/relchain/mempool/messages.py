"""
Mempool gossip messages: hash announcements, requests for unknown hashes and
the full transactions sent in reply.
"""
from dataclasses import dataclass
from typing import Tuple

from relchain.errors import DecodeError
from relchain.ledger.codec import Decoder, Encoder

HAVE, WANT, TXS = "mempool_have", "mempool_want", "mempool_txs"


@dataclass(frozen=True)
class HaveTxs:
    hashes: Tuple[bytes, ...]
    kind = HAVE


@dataclass(frozen=True)
class WantTxs:
    hashes: Tuple[bytes, ...]
    kind = WANT


@dataclass(frozen=True)
class TxBatch:
    txs: Tuple[bytes, ...]
    kind = TXS


def encode_message(msg):
    enc = Encoder()
    if isinstance(msg, (HaveTxs, WantTxs)):
        enc.list(msg.hashes, lambda e, h: e.raw(h))
    else:
        enc.list(msg.txs, lambda e, tx: e.bytes(tx))
    return enc.getvalue()


def decode_message(kind, payload):
    dec = Decoder(payload)
    if kind == HAVE:
        msg = HaveTxs(tuple(dec.list(lambda d: d.raw(32))))
    elif kind == WANT:
        msg = WantTxs(tuple(dec.list(lambda d: d.raw(32))))
    elif kind == TXS:
        msg = TxBatch(tuple(dec.list(lambda d: d.bytes())))
    else:
        raise DecodeError(f"unknown mempool message kind {kind}")
    dec.finish()
    return msg
