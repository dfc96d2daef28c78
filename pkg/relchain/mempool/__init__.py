from relchain.mempool.mempool import Admission, Mempool, PoolEntry, RejectReason
from relchain.mempool.messages import HaveTxs, TxBatch, WantTxs, decode_message, encode_message
