from relchain.abci.calls import call_begin_block, call_commit, call_deliver_tx, call_end_block
from relchain.abci.client import SocketBackend, connect_abci
from relchain.abci.interface import AbciBackend, AppInfo, CheckResult, Phase
from relchain.abci.server import AbciServer, serve_abci
