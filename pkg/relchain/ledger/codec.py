"""
Canonical byte encoding used for hashing, the ledger file and every wire message.

Integers are fixed-width big-endian, byte strings and UTF-8 strings carry a
u32 length prefix, lists carry a u32 element count. There are no map types.
"""
import struct

from relchain.errors import DecodeError

_U8 = struct.Struct(">B")
_U32 = struct.Struct(">I")
_U64 = struct.Struct(">Q")
_I64 = struct.Struct(">q")


class Encoder:

    def __init__(self):
        self._parts = []

    def u8(self, value):
        self._parts.append(_U8.pack(value))
        return self

    def u32(self, value):
        self._parts.append(_U32.pack(value))
        return self

    def u64(self, value):
        self._parts.append(_U64.pack(value))
        return self

    def i64(self, value):
        self._parts.append(_I64.pack(value))
        return self

    def boolean(self, value):
        return self.u8(1 if value else 0)

    def raw(self, data):
        """Append bytes without a length prefix (fixed-size digests)."""
        self._parts.append(bytes(data))
        return self

    def bytes(self, data):
        self._parts.append(_U32.pack(len(data)))
        self._parts.append(bytes(data))
        return self

    def str(self, text):
        return self.bytes(text.encode("utf-8"))

    def list(self, items, encode_item):
        self._parts.append(_U32.pack(len(items)))
        for item in items:
            encode_item(self, item)
        return self

    def getvalue(self):
        return b"".join(self._parts)


class Decoder:

    def __init__(self, data):
        self._data = memoryview(bytes(data))
        self._pos = 0

    def _take(self, size):
        end = self._pos + size
        if end > len(self._data):
            raise DecodeError(f"truncated input: need {size} bytes at offset {self._pos}")
        chunk = self._data[self._pos:end]
        self._pos = end
        return chunk

    def u8(self):
        return _U8.unpack(self._take(1))[0]

    def u32(self):
        return _U32.unpack(self._take(4))[0]

    def u64(self):
        return _U64.unpack(self._take(8))[0]

    def i64(self):
        return _I64.unpack(self._take(8))[0]

    def boolean(self):
        value = self.u8()
        if value > 1:
            raise DecodeError(f"invalid boolean byte {value}")
        return value == 1

    def raw(self, size):
        return bytes(self._take(size))

    def bytes(self):
        return bytes(self._take(self.u32()))

    def str(self):
        try:
            return str(self.bytes(), "utf-8")
        except UnicodeDecodeError as e:
            raise DecodeError(f"invalid utf-8: {e}") from e

    def list(self, decode_item):
        count = self.u32()
        # every element occupies at least one byte
        if count > len(self._data) - self._pos:
            raise DecodeError(f"list length {count} exceeds remaining input")
        return [decode_item(self) for _ in range(count)]

    @property
    def remaining(self):
        return len(self._data) - self._pos

    def finish(self):
        """Canonical inputs leave no trailing bytes."""
        if self.remaining:
            raise DecodeError(f"{self.remaining} trailing bytes")
