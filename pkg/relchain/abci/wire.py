"""
ABCI socket framing (docs/abci-wire.md).

    frame    = length:u32 opcode:u8 payload
    length   = 1 + len(payload)

Responses use the request opcode with the high bit set and start with a
result byte: 0 on success, 1 followed by (error kind, message) strings.
"""
import socket
import struct
from enum import IntEnum

from relchain.errors import DecodeError, error_from_kind, error_to_kind
from relchain.ledger.codec import Decoder, Encoder

_HEADER = struct.Struct(">IB")
MAX_FRAME = 64 * 1024 * 1024
RESPONSE_BIT = 0x80
RESULT_OK = 0
RESULT_ERROR = 1


class Opcode(IntEnum):
    BEGIN_BLOCK = 0x01
    DELIVER_TX = 0x02
    END_BLOCK = 0x03
    COMMIT = 0x04
    CHECK_TX = 0x05
    QUERY = 0x06
    INFO = 0x07


def encode_frame(opcode, payload=b""):
    return _HEADER.pack(1 + len(payload), opcode) + payload


def send_frame(sock, opcode, payload=b""):
    sock.sendall(encode_frame(opcode, payload))


def _read_exact(rfile, size):
    data = rfile.read(size)
    if data is None or len(data) < size:
        return None
    return data


def read_frame(rfile):
    """Next (opcode, payload) from a binary file object, or None on a clean EOF."""
    header = rfile.read(_HEADER.size)
    if not header:
        return None
    if len(header) < _HEADER.size:
        raise DecodeError("connection closed inside a frame header")
    length, opcode = _HEADER.unpack(header)
    if length < 1 or length > MAX_FRAME:
        raise DecodeError(f"invalid frame length {length}")
    payload = _read_exact(rfile, length - 1)
    if payload is None:
        raise DecodeError("connection closed inside a frame payload")
    return opcode, payload


def ok_response():
    return Encoder().u8(RESULT_OK)


def error_response(exc):
    kind, message = error_to_kind(exc)
    return Encoder().u8(RESULT_ERROR).str(kind).str(message).getvalue()


def open_response(payload):
    """Decoder positioned after the result byte; remote errors are re-raised locally."""
    dec = Decoder(payload)
    result = dec.u8()
    if result == RESULT_ERROR:
        raise error_from_kind(dec.str(), dec.str())
    if result != RESULT_OK:
        raise DecodeError(f"unknown result byte {result}")
    return dec


def parse_address(address):
    """'host:port' or (host, port) to a (host, port) tuple."""
    if isinstance(address, tuple):
        return address
    host, _, port = str(address).rpartition(":")
    return host or "127.0.0.1", int(port)


def connect(address, timeout):
    sock = socket.create_connection(parse_address(address), timeout=timeout)
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    return sock
