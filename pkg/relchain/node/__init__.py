from relchain.node.events import EventStream, NewBlockHeaderEvent
from relchain.node.node import AdmissionResponse, CommitResponse, Node
from relchain.node.rpc import (NodeRpc, broadcast_tx_async, broadcast_tx_commit, broadcast_tx_sync, fetch_block,
                               query, subscribe_new_block_header)
