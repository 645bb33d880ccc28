"""LEB128 varints and length-prefixed strings for the binary file formats."""
from __future__ import annotations


class FormatError(ValueError):
    pass


def write_varint(buf: bytearray, n: int) -> None:
    if n < 0:
        raise ValueError("varints are unsigned")
    while n > 0x7F:
        buf.append((n & 0x7F) | 0x80)
        n >>= 7
    buf.append(n)


def write_bytes(buf: bytearray, data: bytes) -> None:
    write_varint(buf, len(data))
    buf += data


def write_str(buf: bytearray, text: str) -> None:
    write_bytes(buf, text.encode("utf-8"))


class Reader:
    def __init__(self, data: bytes) -> None:
        self.data = memoryview(data)
        self.pos = 0

    def varint(self) -> int:
        data, pos = self.data, self.pos
        shift = result = 0
        while True:
            if pos >= len(data):
                raise FormatError("truncated varint")
            byte = data[pos]
            pos += 1
            result |= (byte & 0x7F) << shift
            if byte < 0x80:
                break
            shift += 7
        self.pos = pos
        return result

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated data")
        out = bytes(self.data[self.pos:self.pos + n])
        self.pos += n
        return out

    def bytes(self) -> bytes:
        return self.take(self.varint())

    def str(self) -> str:
        try:
            return self.bytes().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"bad string: {exc}") from None

    def at_end(self) -> bool:
        return self.pos == len(self.data)
