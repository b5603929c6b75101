#!/usr/bin/env python3
"""Independent serializer for the canonical wire layout; prints MD5 golden
digests frozen into the Rust test suite. Kept deliberately separate from the
Rust implementation."""
import hashlib
import math
import struct


def field(b: bytes) -> bytes:
    return struct.pack(">I", len(b)) + b


def random_set(values) -> bytes:
    body = struct.pack(">H", len(values)) + b"".join(struct.pack(">Q", v) for v in values)
    return field(body)


def preimage_request(rv: bytes, src: str, values, request: bytes) -> bytes:
    return field(rv) + field(src.encode()) + random_set(values) + field(request)


def preimage_response(rv: bytes, mapping: float, items) -> bytes:
    out = field(rv)
    out += struct.pack(">Q", struct.unpack(">Q", struct.pack(">d", mapping))[0])
    out += struct.pack(">H", len(items))
    for item in items:
        out += field(item)
    return out


if __name__ == "__main__":
    req = preimage_request(b"\xde\xad\xbe\xef", "CIA", [1, 2, 3], b"QUERY 98LetT1")
    print("request  ", hashlib.md5(req).hexdigest())
    res = preimage_response(b"\xde\xad\xbe\xef", math.sin(9.0), [b"16", b"13"])
    print("response ", hashlib.md5(res).hexdigest())
