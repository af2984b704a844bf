"""Little-endian binary primitives shared by the persisted index/model formats.

All multi-byte integers are little-endian. Varints are unsigned LEB128.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

from .errors import CorruptIndexError

_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_F32 = struct.Struct("<f")
_F64 = struct.Struct("<d")


def read_exact(fh: BinaryIO, size: int) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise CorruptIndexError(f"truncated file: wanted {size} bytes, got {len(data)}")
    return data


def write_u32(fh: BinaryIO, value: int) -> None:
    fh.write(_U32.pack(value))


def read_u32(fh: BinaryIO) -> int:
    return _U32.unpack(read_exact(fh, 4))[0]


def write_u64(fh: BinaryIO, value: int) -> None:
    fh.write(_U64.pack(value))


def read_u64(fh: BinaryIO) -> int:
    return _U64.unpack(read_exact(fh, 8))[0]


def write_f32(fh: BinaryIO, value: float) -> None:
    fh.write(_F32.pack(value))


def read_f32(fh: BinaryIO) -> float:
    return _F32.unpack(read_exact(fh, 4))[0]


def write_f64(fh: BinaryIO, value: float) -> None:
    fh.write(_F64.pack(value))


def read_f64(fh: BinaryIO) -> float:
    return _F64.unpack(read_exact(fh, 8))[0]


def write_varint(fh: BinaryIO, value: int) -> None:
    if value < 0:
        raise ValueError("varints are unsigned")
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            fh.write(bytes((byte | 0x80,)))
        else:
            fh.write(bytes((byte,)))
            return


def read_varint(fh: BinaryIO) -> int:
    result = 0
    shift = 0
    while True:
        byte = read_exact(fh, 1)[0]
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result
        shift += 7
        if shift > 63:
            raise CorruptIndexError("varint overflow")


def write_str(fh: BinaryIO, text: str) -> None:
    data = text.encode("utf-8")
    write_varint(fh, len(data))
    fh.write(data)


def read_str(fh: BinaryIO) -> str:
    length = read_varint(fh)
    return read_exact(fh, length).decode("utf-8")


def expect_magic(fh: BinaryIO, magic: bytes, what: str) -> None:
    found = fh.read(len(magic))
    if found != magic:
        raise CorruptIndexError(f"bad {what} magic: {found!r}")
