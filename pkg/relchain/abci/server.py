"""
Socket server exposing an AbciBackend. Every connection is served by its own
thread and answers its requests strictly in arrival order.
"""
import logging
import socket
import socketserver
import threading

from relchain.abci.wire import Opcode, error_response, ok_response, parse_address, read_frame, send_frame, RESPONSE_BIT
from relchain.errors import DecodeError, RelchainError
from relchain.ledger.codec import Decoder
from relchain.ledger.types import BlockHeader, ExecStatus

logger = logging.getLogger(__name__)


def _begin_block(backend, dec):
    header = BlockHeader.read(dec)
    dec.finish()
    return ok_response().u64(backend.begin_block(header))


def _deliver_tx(backend, dec):
    handle, tx_bytes = dec.u64(), dec.bytes()
    dec.finish()
    statuses = backend.deliver_tx(handle, tx_bytes)
    return ok_response().list(statuses, lambda e, s: s.write(e))


def _end_block(backend, dec):
    handle = dec.u64()
    dec.finish()
    backend.end_block(handle)
    return ok_response()


def _commit(backend, dec):
    handle = dec.u64()
    statuses = dec.list(ExecStatus.read)
    dec.finish()
    return ok_response().raw(backend.commit(handle, statuses))


def _check_tx(backend, dec):
    tx_bytes = dec.bytes()
    dec.finish()
    result = backend.check_tx(tx_bytes)
    return ok_response().boolean(result.ok).str(result.reason)


def _query(backend, dec):
    sql = dec.str()
    dec.finish()
    return ok_response().bytes(backend.query(sql).encode())


def _info(backend, dec):
    dec.finish()
    info = backend.info()
    return ok_response().raw(info.app_hash).u64(info.last_height)


HANDLERS = {
    Opcode.BEGIN_BLOCK: _begin_block,
    Opcode.DELIVER_TX: _deliver_tx,
    Opcode.END_BLOCK: _end_block,
    Opcode.COMMIT: _commit,
    Opcode.CHECK_TX: _check_tx,
    Opcode.QUERY: _query,
    Opcode.INFO: _info,
}


class AbciRequestHandler(socketserver.StreamRequestHandler):

    def setup(self):
        super().setup()
        self.connection.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)

    def handle(self):
        backend = self.server.backend
        peer = self.client_address
        self.server.count_connection()
        logger.debug("abci connection from %s", peer)
        while True:
            try:
                frame = read_frame(self.rfile)
            except (DecodeError, OSError) as e:
                logger.warning("dropping abci connection %s: %s", peer, e)
                return
            if frame is None:
                return
            opcode, payload = frame
            handler = HANDLERS.get(opcode)
            if handler is None:
                logger.warning("unknown abci opcode 0x%02x from %s", opcode, peer)
                return
            try:
                response = handler(backend, Decoder(payload)).getvalue()
            except RelchainError as e:
                response = error_response(e)
            try:
                send_frame(self.connection, opcode | RESPONSE_BIT, response)
            except OSError as e:
                logger.warning("abci connection %s closed while responding: %s", peer, e)
                return


class AbciServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, backend, address):
        super().__init__(parse_address(address), AbciRequestHandler)
        self.backend = backend
        self.connections = 0
        self._count_lock = threading.Lock()
        self._thread = None

    def count_connection(self):
        with self._count_lock:
            self.connections += 1

    @property
    def address(self):
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def start(self):
        self._thread = threading.Thread(target=self.serve_forever, name=f"abci-server-{self.address}", daemon=True)
        self._thread.start()
        logger.info("abci server listening on %s", self.address)
        return self

    def close(self):
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join()


def serve_abci(backend, listen_address="127.0.0.1:0"):
    """Start serving backend; port 0 picks a free port (see `.address`)."""
    return AbciServer(backend, listen_address).start()
