"""
Proxy backend talking to an AbciServer over a single connection. Every call
holds the connection for one request and its response, so a query from an RPC
thread is answered in order between the frames of an open block.
"""
import logging
import threading

from relchain.abci.interface import AbciBackend, AppInfo, CheckResult
from relchain.abci.wire import RESPONSE_BIT, Opcode, connect, open_response, read_frame, send_frame
from relchain.errors import BackendUnavailable, DecodeError
from relchain.ledger.codec import Encoder
from relchain.ledger.types import ExecStatus
from relchain.relational.result import QueryResult

logger = logging.getLogger(__name__)


class _Connection:

    def __init__(self, address, timeout):
        self.address = address
        self._lock = threading.Lock()
        try:
            self._sock = connect(address, timeout)
        except OSError as e:
            raise BackendUnavailable(f"cannot connect to abci server {address}: {e}") from e
        self._rfile = self._sock.makefile("rb")

    def call(self, opcode, payload):
        with self._lock:
            try:
                send_frame(self._sock, opcode, payload)
                frame = read_frame(self._rfile)
            except (OSError, DecodeError) as e:
                raise BackendUnavailable(f"abci server {self.address}: {e}") from e
        if frame is None:
            raise BackendUnavailable(f"abci server {self.address} closed the connection")
        response_opcode, response = frame
        if response_opcode != opcode | RESPONSE_BIT:
            raise BackendUnavailable(f"abci server {self.address} answered 0x{response_opcode:02x} to 0x{opcode:02x}")
        return open_response(response)

    def close(self):
        try:
            self._rfile.close()
            self._sock.close()
        except OSError:
            pass


class SocketBackend(AbciBackend):

    def __init__(self, address, timeout=30.0):
        super().__init__()
        self.address = address
        self._conn = _Connection(address, timeout)

    def _begin_block(self, header):
        enc = Encoder()
        header.write(enc)
        dec = self._conn.call(Opcode.BEGIN_BLOCK, enc.getvalue())
        return dec.u64()

    def _deliver_tx(self, handle, tx_bytes):
        dec = self._conn.call(Opcode.DELIVER_TX, Encoder().u64(handle).bytes(tx_bytes).getvalue())
        return dec.list(ExecStatus.read)

    def _end_block(self, handle):
        self._conn.call(Opcode.END_BLOCK, Encoder().u64(handle).getvalue())

    def _commit(self, handle, statuses):
        enc = Encoder().u64(handle).list(statuses, lambda e, s: s.write(e))
        return self._conn.call(Opcode.COMMIT, enc.getvalue()).raw(32)

    def _check_tx(self, tx_bytes):
        dec = self._conn.call(Opcode.CHECK_TX, Encoder().bytes(tx_bytes).getvalue())
        return CheckResult(dec.boolean(), dec.str())

    def _query(self, sql):
        dec = self._conn.call(Opcode.QUERY, Encoder().str(sql).getvalue())
        return QueryResult.decode(dec.bytes())

    def _info(self):
        dec = self._conn.call(Opcode.INFO, b"")
        return AppInfo(dec.raw(32), dec.u64())

    def close(self):
        self._conn.close()


def connect_abci(address, timeout=30.0):
    """AbciBackend proxy for the server at address ('host:port')."""
    backend = SocketBackend(address, timeout)
    logger.debug("connected to abci server %s", address)
    return backend
