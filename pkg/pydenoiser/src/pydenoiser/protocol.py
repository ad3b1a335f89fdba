"""Server side of the denoiser wire protocol, version 1.

Framing over stdin/stdout, all integers little-endian:

* handshake: the parent sends ``TENDNZ01`` (8 bytes), we echo it back;
* request: ``REQ0``, u32 ``n1 n2 n3``, f64 ``sigma``, then ``n1*n2*n3``
  little-endian f32 values, mode-1 index fastest (Fortran order);
* response: ``RSP0``, the echoed dims, then the payload in the same
  layout.

A response is always written as one buffer so replies are never partial.
"""

import struct
from dataclasses import dataclass

import numpy as np

HANDSHAKE_MAGIC = b"TENDNZ01"
REQUEST_MAGIC = b"REQ0"
RESPONSE_MAGIC = b"RSP0"

_HEADER = struct.Struct("<III")
_SIGMA = struct.Struct("<d")


class ProtocolViolation(Exception):
    """The byte stream does not follow the protocol."""


@dataclass
class Request:
    dims: tuple[int, int, int]
    sigma: float
    tensor: np.ndarray  # float32, shape dims


def _read_exact(stream, n):
    chunks = []
    remaining = n
    while remaining > 0:
        block = stream.read(remaining)
        if not block:
            raise ProtocolViolation(f"stream closed {remaining} bytes short")
        chunks.append(block)
        remaining -= len(block)
    return b"".join(chunks)


def expect_handshake(stdin, stdout) -> None:
    magic = stdin.read(len(HANDSHAKE_MAGIC))
    if magic != HANDSHAKE_MAGIC:
        raise ProtocolViolation(f"bad handshake {magic!r}")
    stdout.write(HANDSHAKE_MAGIC)
    stdout.flush()


def read_request(stdin) -> Request | None:
    """Read one request; None on clean end-of-stream at a message boundary."""
    magic = stdin.read(len(REQUEST_MAGIC))
    if magic == b"":
        return None
    if magic != REQUEST_MAGIC:
        raise ProtocolViolation(f"bad request magic {magic!r}")
    n1, n2, n3 = _HEADER.unpack(_read_exact(stdin, _HEADER.size))
    (sigma,) = _SIGMA.unpack(_read_exact(stdin, _SIGMA.size))
    raw = _read_exact(stdin, 4 * n1 * n2 * n3)
    tensor = np.frombuffer(raw, dtype="<f4").reshape((n1, n2, n3), order="F")
    return Request((n1, n2, n3), sigma, tensor)


def write_response(stdout, dims, tensor: np.ndarray) -> None:
    payload = np.asarray(tensor, dtype="<f4").ravel(order="F").tobytes()
    reply = RESPONSE_MAGIC + _HEADER.pack(*dims) + payload
    stdout.write(reply)
    stdout.flush()
