"""Request loop: handshake, then serve until the parent closes stdin."""

import sys

import numpy as np

from . import AdapterConfig
from .protocol import ProtocolViolation, expect_handshake, read_request, write_response


def _make_runner(config: AdapterConfig):
    if config.mode == "echo":
        return lambda req: req.tensor
    # neural mode: import torch lazily so echo startup stays cheap
    from .network import denoise_array, load_models

    device = "cpu"
    if config.device == "gpu":
        import torch

        if not torch.cuda.is_available():
            raise RuntimeError("device 'gpu' requested but CUDA is not available")
        device = "cuda"
    models = load_models(config.weights_path, device)

    def run(req):
        return denoise_array(models, req.tensor, req.sigma, config.channel_mode, device)

    return run


def serve(config: AdapterConfig) -> int:
    """Serve requests on stdin/stdout; returns a process exit code."""
    stdin = sys.stdin.buffer
    stdout = sys.stdout.buffer
    runner = _make_runner(config)
    try:
        expect_handshake(stdin, stdout)
        while True:
            req = read_request(stdin)
            if req is None:
                return 0
            out = np.asarray(runner(req), dtype=np.float32)
            if out.shape != req.tensor.shape:
                raise RuntimeError(f"runner changed dims {req.tensor.shape} -> {out.shape}")
            if not np.isfinite(out).all():
                raise RuntimeError("runner produced non-finite values")
            write_response(stdout, req.dims, out)
    except ProtocolViolation as exc:
        print(f"pydenoiser: protocol violation: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 1
