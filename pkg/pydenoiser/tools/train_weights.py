#!/usr/bin/env python3
"""Generate the bundled denoiser weights archive.

Trains the small residual CNNs on Gaussian-noised patches of the sample
images shipped with scikit-image and writes ``denoiser.pt``.  This is a
fixture generator, not a training framework: one run with the default
seed produced the archive committed under ``src/pydenoiser/weights/``.

Usage: python tools/train_weights.py [-o OUT] [--steps N]
"""

import argparse
import sys
from pathlib import Path

import numpy as np
import torch

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from pydenoiser.network import ResidualDenoiser, save_weights

GRAY_SOURCES = ("camera", "moon", "coins", "text", "brick", "grass", "gravel", "clock", "page")
COLOR_SOURCES = ("astronaut", "chelsea", "coffee", "cat", "rocket")

PATCH = 40
SIGMA_MAX = 0.3


def load_images(names, color):
    import skimage.data

    images = []
    for name in names:
        arr = getattr(skimage.data, name)().astype(np.float64) / 255.0
        if color and arr.ndim == 3 and arr.shape[2] == 3:
            images.append(arr)
        elif not color and arr.ndim == 2:
            images.append(arr[:, :, None])
    return images


def sample_batch(rng, images, batch, channels):
    """One batch of clean/noisy patch pairs at a single noise level."""
    clean = np.empty((batch, channels, PATCH, PATCH), dtype=np.float32)
    for i in range(batch):
        img = images[rng.integers(len(images))]
        r = rng.integers(img.shape[0] - PATCH)
        c = rng.integers(img.shape[1] - PATCH)
        patch = img[r:r + PATCH, c:c + PATCH, :].transpose(2, 0, 1)
        if rng.random() < 0.5:
            patch = patch[:, :, ::-1]
        clean[i] = patch
    sigma = float(rng.uniform(0.0, SIGMA_MAX))
    noise = sigma * rng.standard_normal(clean.shape).astype(np.float32)
    return torch.from_numpy(clean), torch.from_numpy(clean + noise), sigma


def train(images, channels, steps, seed, lr=1e-3, batch=16):
    rng = np.random.default_rng(seed)
    torch.manual_seed(seed)
    model = ResidualDenoiser(channels)
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    sched = torch.optim.lr_scheduler.StepLR(opt, step_size=max(steps // 3, 1), gamma=0.3)
    model.train()
    for step in range(steps):
        clean, noisy, sigma = sample_batch(rng, images, batch, channels)
        out = model(noisy, sigma)
        loss = torch.mean((out - clean) ** 2)
        opt.zero_grad()
        loss.backward()
        opt.step()
        sched.step()
        if step % 200 == 0 or step == steps - 1:
            print(f"  step {step:5d}  mse {loss.item():.5f}")
    model.eval()
    return model


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("-o", "--output",
                        default=str(Path(__file__).resolve().parent.parent
                                    / "src" / "pydenoiser" / "weights" / "denoiser.pt"))
    parser.add_argument("--steps", type=int, default=3000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print("training gray model")
    gray = train(load_images(GRAY_SOURCES, color=False), 1, args.steps, args.seed)
    print("training color model")
    color = train(load_images(COLOR_SOURCES, color=True), 3, args.steps, args.seed + 1)

    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_weights(out, gray, color)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
