"""Deterministic observation-pattern generators.

All randomness comes from the Philox 4x64 counter-based generator keyed
by the spec's seed, so a given ``(spec, dims)`` pair yields the same mask
on every run and platform.  Element counts are exact: ``elementwise``
observes exactly ``round(rate * n1*n2*n3)`` entries and ``tubal`` exactly
``round(rate * n1*n2)`` spatial positions, chosen as the first entries of
a seeded permutation of the linear indices (mode-1 fastest).
"""

from dataclasses import dataclass

import numpy as np

from .errors import BayerDimsInvalid, InconsistentDims, RateOutOfRange

_KINDS = ("elementwise", "tubal", "bayer", "mask_image")


@dataclass(frozen=True)
class SamplingSpec:
    kind: str
    rate: float | None = None
    seed: int = 0
    mask_path: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown sampling kind {self.kind!r}")
        needs_rate = self.kind in ("elementwise", "tubal")
        if needs_rate:
            if self.rate is None:
                raise RateOutOfRange(f"{self.kind} sampling requires a rate")
            if not 0.0 < self.rate <= 1.0:
                raise RateOutOfRange(f"rate must lie in (0, 1], got {self.rate}")
        elif self.rate is not None:
            raise RateOutOfRange(f"{self.kind} sampling takes no rate")
        if self.kind == "mask_image" and not self.mask_path:
            raise ValueError("mask_image sampling requires mask_path")


def _pick_exact(n_total: int, n_observed: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed))
    flat = np.zeros(n_total, dtype=bool)
    flat[rng.permutation(n_total)[:n_observed]] = True
    return flat


def gen_mask(spec: SamplingSpec, dims: tuple[int, int, int]) -> np.ndarray:
    """Generate a boolean support mask of shape ``dims`` (True = observed)."""
    n1, n2, n3 = dims
    if spec.kind == "elementwise":
        total = n1 * n2 * n3
        k = round(spec.rate * total)
        return _pick_exact(total, k, spec.seed).reshape(dims, order="F")

    if spec.kind == "tubal":
        total = n1 * n2
        k = round(spec.rate * total)
        spatial = _pick_exact(total, k, spec.seed).reshape((n1, n2), order="F")
        return np.repeat(spatial[:, :, None], n3, axis=2)

    if spec.kind == "bayer":
        if n3 != 3 or n1 % 2 != 0 or n2 % 2 != 0:
            raise BayerDimsInvalid(
                f"Bayer sampling needs even spatial dims and 3 channels, got {dims}"
            )
        mask = np.zeros(dims, dtype=bool)
        # 2x2 cell layout (channels R=0, G=1, B=2): G on the main diagonal,
        # R top-right, B bottom-left.
        mask[0::2, 0::2, 1] = True
        mask[1::2, 1::2, 1] = True
        mask[0::2, 1::2, 0] = True
        mask[1::2, 0::2, 2] = True
        return mask

    # mask_image: nonzero pixels observed, replicated across channels
    from .tenio import load_image_stack

    img = load_image_stack(spec.mask_path)
    if img.shape[2] != 1:
        img = img.mean(axis=2, keepdims=True)
    if img.shape[:2] != (n1, n2):
        raise InconsistentDims(
            f"mask image is {img.shape[:2]}, tensor needs {(n1, n2)}"
        )
    spatial = img[:, :, 0] != 0.0
    return np.repeat(spatial[:, :, None], n3, axis=2)
