"""
Optional socket endpoint for external drivers, framed like the ABCI socket
(docs/abci-wire.md) with request opcodes 0x10-0x15. A SUBSCRIBE connection
turns into a one-way stream of event frames.
"""
import logging
import socketserver
import threading
from enum import IntEnum

from relchain.abci.wire import (RESPONSE_BIT, connect, error_response, ok_response, open_response, parse_address,
                                read_frame, send_frame)
from relchain.errors import BackendUnavailable, DecodeError, RelchainError, SubscriptionOverflow
from relchain.ledger.codec import Decoder, Encoder
from relchain.ledger.types import BlockHeader, ExecStatus, decode_block, decode_statuses, decode_tx, \
    encode_statuses, sha256
from relchain.node.events import NewBlockHeaderEvent
from relchain.node.node import AdmissionResponse, CommitResponse
from relchain.relational.result import QueryResult

logger = logging.getLogger(__name__)


class RpcOpcode(IntEnum):
    BROADCAST_TX_COMMIT = 0x10
    BROADCAST_TX_SYNC = 0x11
    BROADCAST_TX_ASYNC = 0x12
    QUERY = 0x13
    FETCH_BLOCK = 0x14
    SUBSCRIBE = 0x15


EVENT_OPCODE = RpcOpcode.SUBSCRIBE | RESPONSE_BIT


def _commit(rpc, dec):
    tx = decode_tx(dec.bytes())
    dec.finish()
    response = rpc.broadcast_tx_commit(tx)
    enc = ok_response().raw(response.tx_hash).u64(response.height)
    enc.list(response.statuses, lambda e, s: s.write(e))
    return enc.u64(int(response.elapsed_ms * 1000))


def _sync(rpc, dec):
    raw = dec.bytes()
    dec.finish()
    response = rpc.broadcast_tx_sync(raw)
    return ok_response().raw(response.tx_hash).boolean(response.accepted).str(response.reason or "")


def _async(rpc, dec):
    raw = dec.bytes()
    dec.finish()
    rpc.scheduler.call_soon_threadsafe(rpc.node.admit, raw)
    return ok_response().raw(sha256(raw))


def _query(rpc, dec):
    sql = dec.str()
    dec.finish()
    return ok_response().bytes(rpc.query(sql).encode())


def _fetch_block(rpc, dec):
    height = dec.u64()
    dec.finish()
    block, statuses = rpc.fetch_block(height)
    return ok_response().bytes(block.encoded).bytes(encode_statuses(statuses))


HANDLERS = {
    RpcOpcode.BROADCAST_TX_COMMIT: _commit,
    RpcOpcode.BROADCAST_TX_SYNC: _sync,
    RpcOpcode.BROADCAST_TX_ASYNC: _async,
    RpcOpcode.QUERY: _query,
    RpcOpcode.FETCH_BLOCK: _fetch_block,
}


class RpcRequestHandler(socketserver.StreamRequestHandler):

    def handle(self):
        rpc = self.server.rpc
        while True:
            try:
                frame = read_frame(self.rfile)
            except (DecodeError, OSError) as e:
                logger.warning("dropping rpc connection %s: %s", self.client_address, e)
                return
            if frame is None:
                return
            opcode, payload = frame
            if opcode == RpcOpcode.SUBSCRIBE:
                self._stream_events(rpc)
                return
            handler = HANDLERS.get(opcode)
            if handler is None:
                logger.warning("unknown rpc opcode 0x%02x from %s", opcode, self.client_address)
                return
            try:
                response = handler(rpc, Decoder(payload)).getvalue()
            except RelchainError as e:
                response = error_response(e)
            try:
                send_frame(self.connection, opcode | RESPONSE_BIT, response)
            except OSError:
                return

    def _stream_events(self, rpc):
        stream = rpc.subscribe_new_block_header()
        try:
            while True:
                event = stream.next(timeout_ms=1000)
                if event is None:
                    if self.server.closing:
                        return
                    continue
                enc = ok_response()
                event.header.write(enc)
                send_frame(self.connection, EVENT_OPCODE, enc.raw(event.block_id).getvalue())
        except SubscriptionOverflow as e:
            logger.warning("closing event connection %s: %s", self.client_address, e)
        except OSError:
            return
        finally:
            rpc.unsubscribe(stream)


class RpcServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, rpc, address):
        super().__init__(parse_address(address), RpcRequestHandler)
        self.rpc = rpc
        self.closing = False
        self._thread = None

    @property
    def address(self):
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def start(self):
        self._thread = threading.Thread(target=self.serve_forever, name=f"rpc-server-{self.address}", daemon=True)
        self._thread.start()
        logger.info("rpc endpoint listening on %s", self.address)
        return self

    def close(self):
        self.closing = True
        self.shutdown()
        self.server_close()


def serve_rpc(rpc, listen_address="127.0.0.1:0"):
    return RpcServer(rpc, listen_address).start()


class RpcClient:
    """Socket counterpart of NodeRpc."""

    def __init__(self, address, timeout=30.0):
        self.address = address
        self.timeout = timeout
        self._lock = threading.Lock()
        self._sock = connect(address, timeout)
        self._rfile = self._sock.makefile("rb")

    def _call(self, opcode, payload):
        with self._lock:
            try:
                send_frame(self._sock, opcode, payload)
                frame = read_frame(self._rfile)
            except (OSError, DecodeError) as e:
                raise BackendUnavailable(f"rpc endpoint {self.address}: {e}") from e
        if frame is None:
            raise BackendUnavailable(f"rpc endpoint {self.address} closed the connection")
        return open_response(frame[1])

    def broadcast_tx_commit(self, tx):
        dec = self._call(RpcOpcode.BROADCAST_TX_COMMIT, Encoder().bytes(tx.encoded).getvalue())
        tx_hash, height = dec.raw(32), dec.u64()
        statuses = tuple(dec.list(ExecStatus.read))
        return CommitResponse(tx_hash, height, statuses, dec.u64() / 1000.0)

    def broadcast_tx_sync(self, tx):
        raw = tx.encoded if hasattr(tx, "encoded") else bytes(tx)
        dec = self._call(RpcOpcode.BROADCAST_TX_SYNC, Encoder().bytes(raw).getvalue())
        tx_hash, accepted, reason = dec.raw(32), dec.boolean(), dec.str()
        return AdmissionResponse(tx_hash, accepted, reason or None)

    def broadcast_tx_async(self, tx):
        return self._call(RpcOpcode.BROADCAST_TX_ASYNC, Encoder().bytes(tx.encoded).getvalue()).raw(32)

    def query(self, sql):
        return QueryResult.decode(self._call(RpcOpcode.QUERY, Encoder().str(sql).getvalue()).bytes())

    def fetch_block(self, height):
        dec = self._call(RpcOpcode.FETCH_BLOCK, Encoder().u64(height).getvalue())
        return decode_block(dec.bytes()), decode_statuses(dec.bytes())

    def subscribe_new_block_header(self):
        """Generator of NewBlockHeaderEvent read from a dedicated connection."""
        sock = connect(self.address, None)
        rfile = sock.makefile("rb")
        send_frame(sock, RpcOpcode.SUBSCRIBE)
        try:
            while True:
                frame = read_frame(rfile)
                if frame is None:
                    return
                dec = open_response(frame[1])
                header = BlockHeader.read(dec)
                yield NewBlockHeaderEvent(header, dec.raw(32))
        finally:
            rfile.close()
            sock.close()

    def close(self):
        self._rfile.close()
        self._sock.close()
