from relchain.ledger.store import Ledger, LedgerEntry
from relchain.ledger.types import (ZERO_HASH, BcTransaction, Block, BlockHeader, ExecCode, ExecStatus, WlStatement,
                                   decode_block, decode_tx, encode_tx, hash_block)
