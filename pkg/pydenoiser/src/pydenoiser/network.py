"""Noise-conditioned residual denoising CNN (torch inference).

The network takes the noisy image plus a constant map holding the noise
level and predicts the noise residual; subtracting it yields the
estimate.  One instance is trained for single-channel slices ("gray")
and one for three-channel images ("color"); both live in a single
weights archive.
"""

import numpy as np
import torch
from torch import nn

FEATURES = 32
LAYERS = 6


class ResidualDenoiser(nn.Module):
    def __init__(self, channels: int, features: int = FEATURES, layers: int = LAYERS):
        super().__init__()
        body = [nn.Conv2d(channels + 1, features, 3, padding=1), nn.ReLU(inplace=True)]
        for _ in range(layers - 2):
            body += [nn.Conv2d(features, features, 3, padding=1), nn.ReLU(inplace=True)]
        body.append(nn.Conv2d(features, channels, 3, padding=1))
        self.body = nn.Sequential(*body)
        self.channels = channels

    def forward(self, x: torch.Tensor, sigma: float) -> torch.Tensor:
        noise_map = x.new_full((x.shape[0], 1, x.shape[2], x.shape[3]), float(sigma))
        return x - self.body(torch.cat([x, noise_map], dim=1))


def save_weights(path, gray: ResidualDenoiser, color: ResidualDenoiser) -> None:
    torch.save(
        {
            "format": 1,
            "features": FEATURES,
            "layers": LAYERS,
            "gray": gray.state_dict(),
            "color": color.state_dict(),
        },
        path,
    )


def load_models(path, device: str = "cpu") -> dict[str, ResidualDenoiser]:
    archive = torch.load(path, map_location=device, weights_only=True)
    if archive.get("format") != 1:
        raise ValueError(f"unsupported weights archive format in {path}")
    models = {}
    for name, channels in (("gray", 1), ("color", 3)):
        model = ResidualDenoiser(channels, archive["features"], archive["layers"])
        model.load_state_dict(archive[name])
        model.to(device).eval()
        models[name] = model
    return models


def denoise_array(models, arr: np.ndarray, sigma: float, channel_mode: str,
                  device: str = "cpu") -> np.ndarray:
    """Denoise an (n1, n2, n3) array, returning float32 of the same shape.

    Three-channel inputs go through the color network jointly when
    ``channel_mode`` is ``joint_rgb``; everything else runs the gray
    network over the frontal slices as a batch.
    """
    n1, n2, n3 = arr.shape
    with torch.no_grad():
        if channel_mode == "joint_rgb" and n3 == 3:
            x = torch.from_numpy(np.ascontiguousarray(arr.transpose(2, 0, 1), dtype=np.float32))
            out = models["color"](x.unsqueeze(0).to(device), sigma)
            return out.squeeze(0).cpu().numpy().transpose(1, 2, 0)
        x = torch.from_numpy(np.ascontiguousarray(arr.transpose(2, 0, 1), dtype=np.float32))
        out = models["gray"](x.unsqueeze(1).to(device), sigma)
        return out.squeeze(1).cpu().numpy().transpose(1, 2, 0)
