"""Denoiser adapter process speaking the tensor denoiser wire protocol.

Run as ``python -m pydenoiser --mode {echo,neural}``.  Echo mode returns
every request payload unchanged and is the protocol conformance
reference; neural mode runs a pretrained noise-conditioned CNN on each
request at the requested noise level.
"""

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

_MODES = ("echo", "neural")
_DEVICES = ("cpu", "gpu")
_CHANNEL_MODES = ("per_slice", "joint_rgb")


@dataclass(frozen=True)
class AdapterConfig:
    mode: str = "echo"
    weights_path: str | None = None
    device: str = "cpu"
    channel_mode: str = "joint_rgb"

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.device not in _DEVICES:
            raise ValueError(f"unknown device {self.device!r}")
        if self.channel_mode not in _CHANNEL_MODES:
            raise ValueError(f"unknown channel_mode {self.channel_mode!r}")
        if (self.mode == "neural") != (self.weights_path is not None):
            raise ValueError("weights_path is required exactly when mode='neural'")


def default_weights_path() -> Path | None:
    """Path of the bundled pretrained weights, or None if not shipped."""
    try:
        path = Path(resources.files("pydenoiser") / "weights" / "denoiser.pt")
    except (ModuleNotFoundError, TypeError):
        return None
    return path if path.is_file() else None


__version__ = "0.1.0"
