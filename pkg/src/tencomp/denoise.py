"""Pluggable denoisers for the completion solver.

The solver's regularizer subproblem is served by a denoiser: a map from a
noisy tensor and a noise level ``sigma`` to a cleaned tensor of the same
shape.  Three kinds are available:

``identity``
    Returns its input; turns the solver into pure low-rank completion.
``tv``
    Total variation denoising, solving ``min_u TV(u) + ||u - v||^2/(2*sigma^2)``
    with a fixed number of dual gradient-projection iterations, either
    independently per frontal slice or jointly over the three channels of
    an RGB tensor.
``external``
    Round-trips through a child process speaking the wire protocol below,
    so that denoisers written in any language (including neural ones) can
    be plugged in.

Wire protocol v1 (all integers little-endian, over the child's stdin/stdout):

* handshake: parent sends the 8 bytes ``TENDNZ01``, child echoes them;
* request: ``REQ0``, u32 ``n1 n2 n3``, f64 ``sigma``, then ``n1*n2*n3``
  f32 values with the mode-1 index fastest (Fortran order);
* response: ``RSP0``, u32 ``n1 n2 n3`` (echoing the request), then
  ``n1*n2*n3`` f32 values in the same order.

Anything else on the pipe, a short read, or the child exiting mid-message
is an ``ExternalDenoiserFailure``.  The parent terminates the child when
the session closes.
"""

import shlex
import struct
import subprocess
import sys
from dataclasses import dataclass

import numpy as np

from .core import as_tensor3
from .errors import (
    DimensionMismatch,
    ExternalDenoiserFailure,
    HandshakeFailure,
    NonFiniteOutput,
    SpawnFailure,
)

HANDSHAKE_MAGIC = b"TENDNZ01"
REQUEST_MAGIC = b"REQ0"
RESPONSE_MAGIC = b"RSP0"

_HEADER = struct.Struct("<III")
_SIGMA = struct.Struct("<d")

_KINDS = ("identity", "tv", "external")
_CHANNEL_MODES = ("per_slice", "joint_rgb")


@dataclass(frozen=True)
class DenoiserSpec:
    """Configuration of a denoiser.

    ``channel_mode`` of ``None`` resolves per call: ``joint_rgb`` when the
    tensor has exactly three frontal slices, ``per_slice`` otherwise.
    ``tv_step`` must stay in ``(0, 0.25]``, the stability bound of the
    dual scheme.
    """

    kind: str = "identity"
    tv_iterations: int = 30
    tv_step: float = 0.25
    external_command: tuple[str, ...] = ()
    channel_mode: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown denoiser kind {self.kind!r}")
        if not 0.0 < self.tv_step <= 0.25:
            raise ValueError(f"tv_step must lie in (0, 0.25], got {self.tv_step}")
        if self.tv_iterations < 1:
            raise ValueError("tv_iterations must be at least 1")
        if self.channel_mode is not None and self.channel_mode not in _CHANNEL_MODES:
            raise ValueError(f"unknown channel_mode {self.channel_mode!r}")
        has_cmd = len(self.external_command) > 0
        if (self.kind == "external") != has_cmd:
            raise ValueError("external_command must be set exactly when kind='external'")


def echo_command() -> tuple[str, ...]:
    """Command line of the bundled echo adapter (identity over the wire)."""
    return (sys.executable, "-m", "tencomp.echo_adapter")


def external_spec(command, channel_mode=None) -> DenoiserSpec:
    """Build an external DenoiserSpec from a command string or sequence."""
    if isinstance(command, str):
        command = tuple(shlex.split(command))
    return DenoiserSpec(kind="external", external_command=tuple(command), channel_mode=channel_mode)


# ---------------------------------------------------------------------------
# total variation

def _grad(u):
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:-1, ...] = u[1:, ...] - u[:-1, ...]
    gy[:, :-1, ...] = u[:, 1:, ...] - u[:, :-1, ...]
    return gx, gy


def _div(px, py):
    out = np.zeros_like(px)
    out[0, ...] = px[0, ...]
    out[1:-1, ...] = px[1:-1, ...] - px[:-2, ...]
    out[-1, ...] -= px[-2, ...]
    out[:, 0, ...] += py[:, 0, ...]
    out[:, 1:-1, ...] += py[:, 1:-1, ...] - py[:, :-2, ...]
    out[:, -1, ...] -= py[:, -2, ...]
    return out


def _grad_norm(gx, gy, joint):
    sq = gx * gx + gy * gy
    if joint:
        return np.sqrt(sq.sum(axis=2, keepdims=True))
    return np.sqrt(sq)


def _tv_dual(v, lam, iterations, step, joint):
    """Dual gradient projection for ``min_u lam*TV(u) + 0.5*||u - v||^2``.

    ``v`` is 2-d for a single slice, 3-d ``(n1, n2, 3)`` when the three
    channels share one gradient norm.  Returns ``v - lam * div(p)`` for
    the final dual field ``p``, clipped to the input range (the model's
    minimizer obeys the maximum principle, and clipping toward it never
    increases the objective).
    """
    px = np.zeros_like(v)
    py = np.zeros_like(v)
    over_lam = v / lam
    for _ in range(iterations):
        gx, gy = _grad(_div(px, py) - over_lam)
        denom = 1.0 + step * _grad_norm(gx, gy, joint)
        px = (px + step * gx) / denom
        py = (py + step * gy) / denom
    u = v - lam * _div(px, py)
    return np.clip(u, v.min(), v.max())


def total_variation(x: np.ndarray, channel_mode: str | None = None) -> float:
    """Isotropic discrete TV with forward differences.

    For ``per_slice`` (2-d input, or 3-d treated slice by slice) each
    slice contributes the sum over pixels of the Euclidean norm of its
    gradient; ``joint_rgb`` couples the channel gradients under one norm.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        gx, gy = _grad(x)
        return float(np.sqrt(gx * gx + gy * gy).sum())
    if x.ndim != 3:
        raise DimensionMismatch(f"expected 2-d or 3-d input, got shape {x.shape}")
    mode = _resolve_channel_mode(channel_mode, x.shape[2])
    gx, gy = _grad(x)
    if mode == "joint_rgb":
        return float(np.sqrt((gx * gx + gy * gy).sum(axis=2)).sum())
    return float(np.sqrt(gx * gx + gy * gy).sum())


def _resolve_channel_mode(channel_mode, n3):
    if channel_mode is None:
        return "joint_rgb" if n3 == 3 else "per_slice"
    if channel_mode == "joint_rgb" and n3 != 3:
        raise DimensionMismatch(f"joint_rgb needs n3 = 3, got n3 = {n3}")
    return channel_mode


def _tv_denoise(spec, noisy, sigma):
    lam = sigma * sigma
    mode = _resolve_channel_mode(spec.channel_mode, noisy.shape[2])
    if mode == "joint_rgb":
        return _tv_dual(noisy, lam, spec.tv_iterations, spec.tv_step, joint=True)
    out = np.empty_like(noisy)
    for k in range(noisy.shape[2]):
        out[:, :, k] = _tv_dual(noisy[:, :, k], lam, spec.tv_iterations, spec.tv_step, joint=False)
    return out


# ---------------------------------------------------------------------------
# external denoiser protocol client

def _read_exact(stream, n):
    chunks = []
    remaining = n
    while remaining > 0:
        block = stream.read(remaining)
        if not block:
            raise ExternalDenoiserFailure(
                f"denoiser process closed the pipe ({n - remaining} of {n} bytes read)"
            )
        chunks.append(block)
        remaining -= len(block)
    return b"".join(chunks)


class DenoiserSession:
    """A live external denoiser process, one request in flight at a time.

    Usable as a context manager; ``close`` terminates the child.  A
    session is not thread-safe: callers needing concurrency must hold
    their own lock or open one session per thread.
    """

    def __init__(self, spec: DenoiserSpec):
        if spec.kind != "external":
            raise ValueError("DenoiserSession requires an external DenoiserSpec")
        self.spec = spec
        try:
            self._proc = subprocess.Popen(
                list(spec.external_command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        except OSError as exc:
            raise SpawnFailure(f"could not start {spec.external_command}: {exc}") from exc
        try:
            self._proc.stdin.write(HANDSHAKE_MAGIC)
            self._proc.stdin.flush()
            reply = _read_exact(self._proc.stdout, len(HANDSHAKE_MAGIC))
        except (OSError, ExternalDenoiserFailure) as exc:
            self.close()
            raise HandshakeFailure(f"handshake with {spec.external_command} failed: {exc}") from exc
        if reply != HANDSHAKE_MAGIC:
            self.close()
            raise HandshakeFailure(f"bad handshake reply {reply!r}")

    def denoise(self, noisy: np.ndarray, sigma: float) -> np.ndarray:
        if self._proc is None:
            raise ExternalDenoiserFailure("session is closed")
        noisy = as_tensor3(noisy, "noisy")
        n1, n2, n3 = noisy.shape
        payload = noisy.astype("<f4").ravel(order="F").tobytes()
        try:
            self._proc.stdin.write(REQUEST_MAGIC)
            self._proc.stdin.write(_HEADER.pack(n1, n2, n3))
            self._proc.stdin.write(_SIGMA.pack(float(sigma)))
            self._proc.stdin.write(payload)
            self._proc.stdin.flush()
            magic = _read_exact(self._proc.stdout, len(RESPONSE_MAGIC))
            if magic != RESPONSE_MAGIC:
                raise ExternalDenoiserFailure(f"bad response magic {magic!r}")
            dims = _HEADER.unpack(_read_exact(self._proc.stdout, _HEADER.size))
            if dims != (n1, n2, n3):
                raise ExternalDenoiserFailure(f"reply dims {dims} do not echo request {(n1, n2, n3)}")
            raw = _read_exact(self._proc.stdout, 4 * n1 * n2 * n3)
        except (OSError, BrokenPipeError) as exc:
            self.close()
            raise ExternalDenoiserFailure(f"denoiser process failed mid-request: {exc}") from exc
        except ExternalDenoiserFailure:
            self.close()
            raise
        out = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape((n1, n2, n3), order="F")
        if not np.isfinite(out).all():
            raise NonFiniteOutput("external denoiser returned NaN or Inf entries")
        return out

    def close(self):
        proc = getattr(self, "_proc", None)
        if proc is None:
            return
        self._proc = None
        for pipe in (proc.stdin, proc.stdout):
            try:
                if pipe is not None:
                    pipe.close()
            except OSError:
                pass
        if proc.poll() is None:
            proc.terminate()
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def spawn_external(spec: DenoiserSpec) -> DenoiserSession:
    """Start an external denoiser process and complete the handshake."""
    return DenoiserSession(spec)


# ---------------------------------------------------------------------------

def denoise(spec: DenoiserSpec, noisy: np.ndarray, sigma: float,
            session: DenoiserSession | None = None) -> np.ndarray:
    """Run the denoiser described by ``spec`` on ``noisy`` at level ``sigma``.

    ``sigma`` is a standard deviation on [0, 1]-scaled data and must be
    positive for the kinds that use it (``tv`` and ``external``); the
    identity kind ignores it.  For repeated external calls pass a live
    ``session`` to avoid a process spawn per call.
    """
    noisy = as_tensor3(noisy, "noisy")
    if spec.kind == "identity":
        return noisy
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if spec.kind == "tv":
        out = _tv_denoise(spec, noisy, sigma)
        if not np.isfinite(out).all():
            raise NonFiniteOutput("tv denoiser produced non-finite entries")
        return out
    if session is not None:
        return session.denoise(noisy, sigma)
    with DenoiserSession(spec) as tmp:
        return tmp.denoise(noisy, sigma)
