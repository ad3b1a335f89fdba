"""Bundled identity adapter for the denoiser wire protocol.

Run as ``python -m tencomp.echo_adapter``.  Echoes every request payload
back unchanged; used for protocol conformance tests and as a template for
real adapters.  Exits 0 on clean end-of-stream at a message boundary,
nonzero on any protocol violation.
"""

import struct
import sys

HANDSHAKE_MAGIC = b"TENDNZ01"
REQUEST_MAGIC = b"REQ0"
RESPONSE_MAGIC = b"RSP0"

_HEADER = struct.Struct("<III")
_SIGMA = struct.Struct("<d")


def _read_exact(stream, n):
    chunks = []
    remaining = n
    while remaining > 0:
        block = stream.read(remaining)
        if not block:
            return None
        chunks.append(block)
        remaining -= len(block)
    return b"".join(chunks)


def main() -> int:
    stdin = sys.stdin.buffer
    stdout = sys.stdout.buffer
    handshake = _read_exact(stdin, len(HANDSHAKE_MAGIC))
    if handshake != HANDSHAKE_MAGIC:
        return 1
    stdout.write(HANDSHAKE_MAGIC)
    stdout.flush()
    while True:
        magic = stdin.read(len(REQUEST_MAGIC))
        if magic == b"":
            return 0
        if magic != REQUEST_MAGIC:
            return 1
        head = _read_exact(stdin, _HEADER.size)
        if head is None:
            return 1
        n1, n2, n3 = _HEADER.unpack(head)
        if _read_exact(stdin, _SIGMA.size) is None:
            return 1
        payload = _read_exact(stdin, 4 * n1 * n2 * n3)
        if payload is None:
            return 1
        stdout.write(RESPONSE_MAGIC)
        stdout.write(head)
        stdout.write(payload)
        stdout.flush()


if __name__ == "__main__":
    sys.exit(main())
